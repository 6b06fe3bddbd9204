// Experiment orchestration: multi-seed training batches, ablation variants,
// the pure-theory baseline, and machine-readable reports (JSON + CSV with
// box-plot quartile data). Run r of a batch owns seed master_seed + r; every
// method inside a run shares the same dataset split and base seed, so method
// comparisons are paired. Runs are independent and may execute on parallel
// threads; the report is assembled in run order and is byte-identical
// regardless of the thread count.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "penet/datagen.hpp"
#include "penet/dataset.hpp"
#include "penet/penet.hpp"

namespace penet {

// ---------------------------------------------------------------------------
// Configuration

struct StageConfigs {
  TrainConfig pre_explore{5, 0.005, 0.9, 20, 300, 0};
  std::size_t n_theory = 500;
  TrainConfig pretrain{5, 0.005, 0.9, 20, 200, 0};
  TrainConfig finetune{2, 0.0001, 0.8, 20, 100, 0};
  CompositeLossConfig composite;
  double train_frac = 0.8;
};

inline const std::vector<std::string>& all_methods() {
  static const std::vector<std::string> methods{
      "PE-NET", "PE-NET-WMA", "PE-NET-WSP", "BL-NET", "BP-NET"};
  return methods;
}

struct ExperimentConfig {
  GeneratorConfig generator;
  std::uint64_t dataset_seed = 42;
  std::string dataset1_csv;  // optional: read instead of generating
  std::string dataset2_csv;
  StageConfigs stages;
  std::size_t n_runs = 10;
  std::uint64_t master_seed = 1;
  std::vector<std::string> methods = all_methods();

  void validate() const {
    if (n_runs < 1)
      throw std::invalid_argument("ExperimentConfig: n_runs must be >= 1");
    for (const auto& m : methods)
      if (std::find(all_methods().begin(), all_methods().end(), m) ==
          all_methods().end())
        throw std::invalid_argument("ExperimentConfig: unknown method " + m);
  }
};

namespace detail {

inline nlohmann::ordered_json train_config_json(const TrainConfig& c) {
  return {{"minibatch", c.minibatch},
          {"initial_lr", c.initial_lr},
          {"lr_decay", c.lr_decay},
          {"lr_drop_period", c.lr_drop_period},
          {"epochs", c.epochs}};
}

inline TrainConfig train_config_from(const nlohmann::json& j, TrainConfig fb) {
  fb.minibatch = j.value("minibatch", fb.minibatch);
  fb.initial_lr = j.value("initial_lr", fb.initial_lr);
  fb.lr_decay = j.value("lr_decay", fb.lr_decay);
  fb.lr_drop_period = j.value("lr_drop_period", fb.lr_drop_period);
  fb.epochs = j.value("epochs", fb.epochs);
  return fb;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["generator"] = to_json(c.generator);
  j["dataset_seed"] = c.dataset_seed;
  j["dataset1_csv"] = c.dataset1_csv;
  j["dataset2_csv"] = c.dataset2_csv;
  j["stages"] = {{"pre_explore", detail::train_config_json(c.stages.pre_explore)},
                 {"n_theory", c.stages.n_theory},
                 {"pretrain", detail::train_config_json(c.stages.pretrain)},
                 {"finetune", detail::train_config_json(c.stages.finetune)},
                 {"composite",
                  {{"gate_delta", c.stages.composite.gate_delta},
                   {"freeze_sp", c.stages.composite.freeze_sp}}},
                 {"train_frac", c.stages.train_frac}};
  j["n_runs"] = c.n_runs;
  j["master_seed"] = c.master_seed;
  j["methods"] = c.methods;
  return j;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (j.contains("generator"))
    c.generator = generator_config_from_json(j.at("generator"));
  c.dataset_seed = j.value("dataset_seed", c.dataset_seed);
  c.dataset1_csv = j.value("dataset1_csv", c.dataset1_csv);
  c.dataset2_csv = j.value("dataset2_csv", c.dataset2_csv);
  if (j.contains("stages")) {
    const auto& s = j.at("stages");
    if (s.contains("pre_explore"))
      c.stages.pre_explore =
          detail::train_config_from(s.at("pre_explore"), c.stages.pre_explore);
    c.stages.n_theory = s.value("n_theory", c.stages.n_theory);
    if (s.contains("pretrain"))
      c.stages.pretrain =
          detail::train_config_from(s.at("pretrain"), c.stages.pretrain);
    if (s.contains("finetune"))
      c.stages.finetune =
          detail::train_config_from(s.at("finetune"), c.stages.finetune);
    if (s.contains("composite")) {
      c.stages.composite.gate_delta =
          s.at("composite").value("gate_delta", c.stages.composite.gate_delta);
      c.stages.composite.freeze_sp =
          s.at("composite").value("freeze_sp", c.stages.composite.freeze_sp);
    }
    c.stages.train_frac = s.value("train_frac", c.stages.train_frac);
  }
  c.n_runs = j.value("n_runs", c.n_runs);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.methods = j.value("methods", c.methods);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Box statistics

struct QuartileStats {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

// Linear interpolation between closest ranks (inclusive method).
inline double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty input");
  std::sort(values.begin(), values.end());
  double pos = p * static_cast<double>(values.size() - 1);
  auto i = static_cast<std::size_t>(pos);
  double frac = pos - static_cast<double>(i);
  if (i + 1 >= values.size()) return values.back();
  return values[i] + frac * (values[i + 1] - values[i]);
}

inline double median(const std::vector<double>& values) {
  return quantile(values, 0.5);
}

inline QuartileStats quartiles(const std::vector<double>& values) {
  return {quantile(values, 0.0), quantile(values, 0.25), quantile(values, 0.5),
          quantile(values, 0.75), quantile(values, 1.0)};
}

// ---------------------------------------------------------------------------
// Report model

struct MethodResult {
  std::string name;
  std::string unit;                      // "deg" or "mm"
  std::optional<double> reference;       // published value, different data source
  std::vector<std::size_t> run_indices;  // successful runs, ascending
  std::vector<double> rmse_runs;         // aligned with run_indices
  std::vector<std::size_t> failed_runs;  // diverged runs
  double median = 0.0;
  QuartileStats box;
};

struct TheoryBaselineResult {
  double rmse_deg = 0.0;
  std::vector<std::size_t> failed_samples;  // equivalence failures, excluded
};

struct ExperimentReport {
  std::string kind;  // "stage" (two-stage metrics) or "ablation"
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::size_t n_runs = 0;
  std::string reference_label = "reference, different data source";
  std::string notes;
  std::vector<MethodResult> entries;
  std::optional<TheoryBaselineResult> theory_baseline;

  const MethodResult& entry(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return e;
    throw std::invalid_argument("ExperimentReport: no entry named " + name);
  }

  bool any_failed() const {
    for (const auto& e : entries)
      if (!e.failed_runs.empty()) return true;
    return false;
  }
};

inline const std::map<std::string, double>& reference_rmse() {
  static const std::map<std::string, double> refs{
      {"SP-NET", 0.7672},      {"ES-NET-Do", 0.7133},
      {"ES-NET-T", 0.4916},    {"PE-NET", 0.3922},
      {"PE-NET-WMA", 0.6019},  {"PE-NET-WSP", 23.7527},
      {"BL-NET", 6.9424},      {"BP-NET", 6.3572},
      {"theory-baseline", 1.6164}};
  return refs;
}

// ---------------------------------------------------------------------------
// Theory baseline: equivalence map + bending surrogate, no learning

inline TheoryBaselineResult theory_baseline(const Dataset& dataset2,
                                            const GeneratorConfig& gen) {
  dataset2.validate();
  auto index_of = [&](const std::string& name) {
    for (std::size_t c = 0; c < dataset2.feature_names.size(); ++c)
      if (dataset2.feature_names[c] == name) return c;
    throw schema_error("theory_baseline: dataset lacks column " + name);
  };
  std::size_t iDo = index_of("Do"), iT = index_of("T"), iTr = index_of("Tr");
  std::size_t iRB = index_of("RB"), iA = index_of("alphaB");
  std::size_t iV = index_of("vB"), iW = index_of("omegaB");

  ProcessEffect effect = gen.process_effect();
  TheoryBaselineResult result;
  double sse = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < dataset2.size(); ++i) {
    const auto& row = dataset2.features[i];
    double pred;
    try {
      SingleShape eq = equivalent_tube(BmtShape{row[iDo], row[iT], row[iTr]},
                                       gen.lambda2(), gen.tr_is_inner);
      ProcessParams p;
      p.RB = row[iRB];
      p.alphaB = row[iA];
      p.vB = row[iV];
      p.omegaB = row[iW];
      auto layers = single_tube_layers(eq.Do_eq, eq.T_eq, gen.outer);
      pred = springback_angle(layers, p, gen.grid, effect);
    } catch (const std::exception&) {
      result.failed_samples.push_back(i);
      continue;
    }
    double d = pred - dataset2.labels[i];
    sse += d * d;
    ++used;
  }
  if (used == 0)
    throw std::runtime_error("theory_baseline: every sample failed");
  result.rmse_deg = std::sqrt(sse / static_cast<double>(used));
  return result;
}

// ---------------------------------------------------------------------------
// Training batches

namespace detail {

constexpr std::uint64_t kTagEsInit = 101;
constexpr std::uint64_t kTagSpInit = 102;
constexpr std::uint64_t kTagPreExplore = 103;
constexpr std::uint64_t kTagPretrain = 104;
constexpr std::uint64_t kTagSplit2 = 105;
constexpr std::uint64_t kTagFinetune = 106;
constexpr std::uint64_t kTagWmaEs = 107;
constexpr std::uint64_t kTagWspSp = 108;
constexpr std::uint64_t kTagBlEs = 109;
constexpr std::uint64_t kTagBlSp = 110;
constexpr std::uint64_t kTagBp = 111;

inline Normalizer slice_normalizer(const Normalizer& n, std::size_t from,
                                   std::size_t to) {
  std::vector<double> mins(n.mins().begin() + from, n.mins().begin() + to);
  std::vector<double> maxs(n.maxs().begin() + from, n.maxs().begin() + to);
  std::vector<std::string> names;
  if (!n.names().empty())
    names.assign(n.names().begin() + from, n.names().begin() + to);
  return Normalizer(std::move(mins), std::move(maxs), std::move(names));
}

inline Normalizer concat_normalizer(const Normalizer& a, const Normalizer& b) {
  std::vector<double> mins = a.mins();
  mins.insert(mins.end(), b.mins().begin(), b.mins().end());
  std::vector<double> maxs = a.maxs();
  maxs.insert(maxs.end(), b.maxs().begin(), b.maxs().end());
  std::vector<std::string> names = a.names();
  names.insert(names.end(), b.names().begin(), b.names().end());
  return Normalizer(std::move(mins), std::move(maxs), std::move(names));
}

inline std::vector<std::vector<double>> column_slice(
    const std::vector<std::vector<double>>& rows, std::size_t from,
    std::size_t to) {
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (const auto& row : rows)
    out.emplace_back(row.begin() + from, row.begin() + to);
  return out;
}

struct RunOutputs {
  std::map<std::string, double> values;       // metric name -> value
  std::map<std::string, std::string> failed;  // metric name -> reason
};

// One seeded run: stage-1 components, the full fine-tuned network and, when
// requested, the ablation variants. Every method shares the bi-layer split
// and the fine-tune schedule seed.
inline RunOutputs execute_run(const ExperimentConfig& cfg, const Dataset& d1,
                              const Dataset& d2, std::size_t run_index,
                              bool with_ablations) {
  const StageConfigs& st = cfg.stages;
  std::uint64_t run_seed = cfg.master_seed + run_index;
  RunOutputs out;

  auto want = [&](const std::string& m) {
    return std::find(cfg.methods.begin(), cfg.methods.end(), m) !=
           cfg.methods.end();
  };

  const std::array<Interval, 3> shape_bounds{
      cfg.generator.bounds.Do, cfg.generator.bounds.T, cfg.generator.bounds.Tr};
  TheoryConfig theory{cfg.generator.lambda2(), cfg.generator.tr_is_inner};
  std::size_t n_features = d2.feature_names.size();

  TrainConfig pre_cfg = st.pre_explore;
  pre_cfg.seed = derive_seed(run_seed, kTagPreExplore);
  TrainConfig pt_cfg = st.pretrain;
  pt_cfg.seed = derive_seed(run_seed, kTagPretrain);
  TrainConfig ft_cfg = st.finetune;
  ft_cfg.seed = derive_seed(run_seed, kTagFinetune);

  auto pre = pre_explore_esnet(
      Mlp::init({3, 10, 2}, Activation::Tanh, derive_seed(run_seed, kTagEsInit)),
      shape_bounds, st.n_theory, theory.lambda2, pre_cfg, theory.tr_is_inner,
      st.train_frac);
  out.values["ES-NET-Do"] = pre.rmse_do_mm;
  out.values["ES-NET-T"] = pre.rmse_t_mm;

  auto pt = pretrain_spnet(Mlp::init({d1.feature_names.size(), 10, 1},
                                     Activation::Tanh,
                                     derive_seed(run_seed, kTagSpInit)),
                           d1, pt_cfg, st.train_frac);
  out.values["SP-NET"] = pt.test_rmse_deg;

  auto split2 = split_dataset(d2, st.train_frac, derive_seed(run_seed, kTagSplit2));

  auto run_finetune = [&](const std::string& name, PeNet pe) {
    try {
      auto ft = finetune_split(pe, split2.train, split2.test, ft_cfg);
      out.values[name] = ft.test_rmse_deg;
    } catch (const divergence_error& e) {
      out.failed[name] = e.what();
    }
  };

  if (want("PE-NET"))
    run_finetune("PE-NET", assemble(pre.net, pt.net, theory, st.composite));

  if (with_ablations) {
    auto shape_cols = column_slice(split2.train.features, 0, 3);
    auto first2_cols = column_slice(split2.train.features, 0, 2);
    auto proc_cols = column_slice(split2.train.features, 3, n_features);
    std::vector<std::string> proc_names(d2.feature_names.begin() + 3,
                                        d2.feature_names.end());

    if (want("PE-NET-WMA")) {
      EsNet es{Mlp::init({3, 10, 2}, Activation::Tanh,
                         derive_seed(run_seed, kTagWmaEs)),
               Normalizer::fit(shape_cols, {"Do", "T", "Tr"}),
               slice_normalizer(pt.net.in_norm, 0, 2)};
      run_finetune("PE-NET-WMA", assemble(std::move(es), pt.net, theory, st.composite));
    }

    if (want("PE-NET-WSP")) {
      Normalizer proc_norm = Normalizer::fit(proc_cols, proc_names);
      SpNet sp{Mlp::init({n_features - 1, 10, 1}, Activation::Tanh,
                         derive_seed(run_seed, kTagWspSp)),
               concat_normalizer(pre.net.out_norm, proc_norm),
               Normalizer::fit_column(split2.train.labels, "springback")};
      run_finetune("PE-NET-WSP", assemble(pre.net, std::move(sp), theory, st.composite));
    }

    if (want("BL-NET")) {
      Normalizer shared2 = Normalizer::fit(first2_cols, {"Do", "T"});
      EsNet es{Mlp::init({3, 10, 2}, Activation::Tanh,
                         derive_seed(run_seed, kTagBlEs)),
               Normalizer::fit(shape_cols, {"Do", "T", "Tr"}), shared2};
      SpNet sp{Mlp::init({n_features - 1, 10, 1}, Activation::Tanh,
                         derive_seed(run_seed, kTagBlSp)),
               concat_normalizer(shared2, Normalizer::fit(proc_cols, proc_names)),
               Normalizer::fit_column(split2.train.labels, "springback")};
      CompositeLossConfig data_only = st.composite;
      data_only.use_theory_term = false;
      run_finetune("BL-NET", assemble(std::move(es), std::move(sp), theory, data_only));
    }

    if (want("BP-NET")) {
      try {
        Mlp mlp = Mlp::init({n_features, 10, 1}, Activation::Tanh,
                            derive_seed(run_seed, kTagBp));
        Normalizer in_norm = Normalizer::fit(split2.train.features,
                                             d2.feature_names);
        Normalizer label_norm =
            Normalizer::fit_column(split2.train.labels, "springback");
        std::vector<std::vector<double>> xn, yn;
        for (const auto& x : split2.train.features) xn.push_back(in_norm.apply(x));
        for (double label : split2.train.labels)
          yn.push_back({label_norm.apply1(label)});
        fit(mlp, xn, yn, ft_cfg);
        double sse = 0.0;
        for (std::size_t i = 0; i < split2.test.size(); ++i) {
          double y = label_norm.invert1(
              mlp.forward(in_norm.apply(split2.test.features[i]))[0]);
          double d = y - split2.test.labels[i];
          sse += d * d;
        }
        out.values["BP-NET"] =
            std::sqrt(sse / static_cast<double>(split2.test.size()));
      } catch (const divergence_error& e) {
        out.failed["BP-NET"] = e.what();
      }
    }
  }
  return out;
}

inline MethodResult collect_metric(const std::string& name,
                                   const std::string& unit,
                                   const std::vector<RunOutputs>& runs) {
  MethodResult entry;
  entry.name = name;
  entry.unit = unit;
  if (auto it = reference_rmse().find(name); it != reference_rmse().end())
    entry.reference = it->second;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (auto it = runs[r].values.find(name); it != runs[r].values.end()) {
      entry.run_indices.push_back(r);
      entry.rmse_runs.push_back(it->second);
    } else if (runs[r].failed.count(name)) {
      entry.failed_runs.push_back(r);
    }
  }
  if (!entry.rmse_runs.empty()) {
    entry.median = penet::median(entry.rmse_runs);
    entry.box = quartiles(entry.rmse_runs);
  }
  return entry;
}

inline std::vector<RunOutputs> execute_batch(const ExperimentConfig& cfg,
                                             const Dataset& d1, const Dataset& d2,
                                             bool with_ablations,
                                             std::size_t jobs) {
  std::vector<RunOutputs> runs(cfg.n_runs);
  if (jobs <= 1) {
    for (std::size_t r = 0; r < cfg.n_runs; ++r)
      runs[r] = execute_run(cfg, d1, d2, r, with_ablations);
    return runs;
  }
  std::vector<std::thread> pool;
  std::size_t workers = std::min(jobs, cfg.n_runs);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t r = w; r < cfg.n_runs; r += workers)
        runs[r] = execute_run(cfg, d1, d2, r, with_ablations);
    });
  }
  for (auto& t : pool) t.join();
  return runs;
}

inline std::string report_notes() {
  return "Reference values come from a different data source and are context "
         "only, never pass/fail targets. The dynamic-weight gate (z = 0 when "
         "the mean absolute implicit deviation per output stays within "
         "gate_delta) is a declared interpretation.";
}

}  // namespace detail

inline std::pair<Dataset, Dataset> load_or_generate_datasets(
    const ExperimentConfig& cfg) {
  Dataset d1 = cfg.dataset1_csv.empty()
                   ? generate_dataset1(cfg.generator, cfg.dataset_seed)
                   : read_csv(cfg.dataset1_csv);
  Dataset d2 = cfg.dataset2_csv.empty()
                   ? generate_dataset2(cfg.generator, cfg.dataset_seed)
                   : read_csv(cfg.dataset2_csv);
  return {std::move(d1), std::move(d2)};
}

// Two-stage metrics batch: springback-subnet test RMSE, shape-subnet
// theory-fit RMSE per output, fine-tuned network test RMSE; medians over
// n_runs seeded runs.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                       const Dataset& d1, const Dataset& d2,
                                       std::size_t jobs = 1) {
  cfg.validate();
  auto runs = detail::execute_batch(cfg, d1, d2, /*with_ablations=*/false, jobs);
  ExperimentReport report;
  report.kind = "stage";
  report.config_hash = config_hash(to_json(cfg));
  report.master_seed = cfg.master_seed;
  report.n_runs = cfg.n_runs;
  report.notes = detail::report_notes();
  report.entries = {detail::collect_metric("SP-NET", "deg", runs),
                    detail::collect_metric("ES-NET-Do", "mm", runs),
                    detail::collect_metric("ES-NET-T", "mm", runs),
                    detail::collect_metric("PE-NET", "deg", runs)};
  return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                       std::size_t jobs = 1) {
  auto [d1, d2] = load_or_generate_datasets(cfg);
  return run_experiment(cfg, d1, d2, jobs);
}

// Controlled-comparison batch over the configured methods, plus the pure
// theory baseline on the same bi-layer data.
inline ExperimentReport run_ablations(const ExperimentConfig& cfg,
                                      const Dataset& d1, const Dataset& d2,
                                      std::size_t jobs = 1) {
  cfg.validate();
  auto runs = detail::execute_batch(cfg, d1, d2, /*with_ablations=*/true, jobs);
  ExperimentReport report;
  report.kind = "ablation";
  report.config_hash = config_hash(to_json(cfg));
  report.master_seed = cfg.master_seed;
  report.n_runs = cfg.n_runs;
  report.notes = detail::report_notes();
  for (const auto& m : all_methods())
    if (std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end())
      report.entries.push_back(detail::collect_metric(m, "deg", runs));
  report.theory_baseline = theory_baseline(d2, cfg.generator);
  return report;
}

inline ExperimentReport run_ablations(const ExperimentConfig& cfg,
                                      std::size_t jobs = 1) {
  auto [d1, d2] = load_or_generate_datasets(cfg);
  return run_ablations(cfg, d1, d2, jobs);
}

// ---------------------------------------------------------------------------
// Report serialization

inline nlohmann::ordered_json report_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["schema"] = "penet-report-v1";
  j["kind"] = report.kind;
  j["config_hash"] = report.config_hash;
  j["master_seed"] = report.master_seed;
  j["n_runs"] = report.n_runs;
  j["reference_label"] = report.reference_label;
  j["notes"] = report.notes;
  auto entries = nlohmann::ordered_json::array();
  for (const auto& e : report.entries) {
    nlohmann::ordered_json je;
    je["name"] = e.name;
    je["unit"] = e.unit;
    if (e.reference) je["reference"] = *e.reference;
    je["run_indices"] = e.run_indices;
    je["rmse_runs"] = e.rmse_runs;
    je["failed_runs"] = e.failed_runs;
    if (!e.rmse_runs.empty()) {
      je["median"] = e.median;
      je["box"] = {{"min", e.box.min}, {"q1", e.box.q1},
                   {"median", e.box.median}, {"q3", e.box.q3},
                   {"max", e.box.max}};
    }
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  if (report.theory_baseline) {
    j["theory_baseline"] = {
        {"rmse", report.theory_baseline->rmse_deg},
        {"reference", reference_rmse().at("theory-baseline")},
        {"failed_samples", report.theory_baseline->failed_samples}};
  }
  return j;
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport report;
  report.kind = j.at("kind").get<std::string>();
  report.config_hash = j.at("config_hash").get<std::string>();
  report.master_seed = j.at("master_seed").get<std::uint64_t>();
  report.n_runs = j.at("n_runs").get<std::size_t>();
  report.reference_label = j.at("reference_label").get<std::string>();
  report.notes = j.at("notes").get<std::string>();
  for (const auto& je : j.at("entries")) {
    MethodResult e;
    e.name = je.at("name").get<std::string>();
    e.unit = je.at("unit").get<std::string>();
    if (je.contains("reference")) e.reference = je.at("reference").get<double>();
    e.run_indices = je.at("run_indices").get<std::vector<std::size_t>>();
    e.rmse_runs = je.at("rmse_runs").get<std::vector<double>>();
    e.failed_runs = je.at("failed_runs").get<std::vector<std::size_t>>();
    if (je.contains("median")) {
      e.median = je.at("median").get<double>();
      const auto& box = je.at("box");
      e.box = {box.at("min").get<double>(), box.at("q1").get<double>(),
               box.at("median").get<double>(), box.at("q3").get<double>(),
               box.at("max").get<double>()};
    }
    report.entries.push_back(std::move(e));
  }
  if (j.contains("theory_baseline")) {
    TheoryBaselineResult tb;
    tb.rmse_deg = j.at("theory_baseline").at("rmse").get<double>();
    tb.failed_samples = j.at("theory_baseline")
                            .at("failed_samples")
                            .get<std::vector<std::size_t>>();
    report.theory_baseline = tb;
  }
  return report;
}

// 17 significant digits: report CSVs must re-derive the box statistics
// exactly.
inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Writes report.json, rmse_runs.csv (method, seed, rmse) and boxplot.csv
// (method, min, q1, median, q3, max) with stable ordering.
inline void emit_report(const ExperimentReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_json_file(report_to_json(report),
                  (std::filesystem::path(dir) / "report.json").string());

  std::ofstream runs((std::filesystem::path(dir) / "rmse_runs.csv").string(),
                     std::ios::binary);
  if (!runs) throw std::runtime_error("emit_report: cannot open rmse_runs.csv");
  runs << "method,seed,rmse\n";
  for (const auto& e : report.entries)
    for (std::size_t k = 0; k < e.rmse_runs.size(); ++k)
      runs << e.name << ',' << report.master_seed + e.run_indices[k] << ','
           << format_g17(e.rmse_runs[k]) << '\n';
  if (!runs) throw std::runtime_error("emit_report: write failed (rmse_runs.csv)");

  std::ofstream box((std::filesystem::path(dir) / "boxplot.csv").string(),
                    std::ios::binary);
  if (!box) throw std::runtime_error("emit_report: cannot open boxplot.csv");
  box << "method,min,q1,median,q3,max\n";
  for (const auto& e : report.entries) {
    if (e.rmse_runs.empty()) continue;
    box << e.name << ',' << format_g17(e.box.min) << ',' << format_g17(e.box.q1)
        << ',' << format_g17(e.box.median) << ',' << format_g17(e.box.q3) << ','
        << format_g17(e.box.max) << '\n';
  }
  if (!box) throw std::runtime_error("emit_report: write failed (boxplot.csv)");
}

inline ExperimentReport load_report(const std::string& dir) {
  return report_from_json(
      read_json_file((std::filesystem::path(dir) / "report.json").string()));
}

}  // namespace penet
