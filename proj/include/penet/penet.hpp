// Two-stage physics-guided springback predictor.
//
// Stage 1 builds the parts: the shape subnet (3 -> 10 -> 2) is pre-explored
// against the analytic section-equivalence map, and the springback subnet
// (2+P -> 10 -> 1) is pretrained on the large single-layer dataset. Stage 2
// stacks them (shape outputs feed the first two springback inputs through a
// denormalize/renormalize affine glue) and fine-tunes on the small bi-layer
// dataset with the composite loss z*Lp + (1-z)*Ld, where Lp pulls the
// implicit shape output toward theory, Ld is the data loss, and the dynamic
// weight z is the normal-interval mass of the implicit deviation, gated to
// zero once the deviation is physically plausible.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "penet/dataset.hpp"
#include "penet/errors.hpp"
#include "penet/lhs.hpp"
#include "penet/mlp.hpp"
#include "penet/model_io.hpp"
#include "penet/normalize.hpp"
#include "penet/section.hpp"
#include "penet/train.hpp"

namespace penet {

// Shape-equivalence subnet: (Do, T, Tr) -> (Do_eq, T_eq), all min-max
// normalized; in_norm is fitted on the theory-domain sample, out_norm on the
// theory targets.
struct EsNet {
  Mlp mlp;
  Normalizer in_norm;   // Do, T, Tr
  Normalizer out_norm;  // Do, T (equivalent tube)

  void validate() const {
    const std::vector<std::size_t> expected{3, 10, 2};
    if (mlp.layer_dims != expected)
      throw schema_error("EsNet: layer dims must be [3, 10, 2]");
    if (in_norm.size() != 3 || out_norm.size() != 2)
      throw schema_error("EsNet: normalizer sizes must be 3 and 2");
  }
};

// Springback subnet: (Do, T, process...) -> springback angle, normalized.
struct SpNet {
  Mlp mlp;
  Normalizer in_norm;     // Do, T, then P process features
  Normalizer label_norm;  // springback (degrees)

  std::size_t process_count() const { return in_norm.size() - 2; }

  void validate() const {
    if (mlp.layer_dims.size() != 3 || mlp.layer_dims.back() != 1)
      throw schema_error("SpNet: expected one hidden layer and a scalar output");
    if (in_norm.size() < 2 || mlp.input_dim() != in_norm.size())
      throw schema_error("SpNet: input normalizer inconsistent with network");
    if (label_norm.size() != 1)
      throw schema_error("SpNet: label normalizer must be scalar");
  }
};

// Handle for the analytic equivalence map used by the composite loss.
struct TheoryConfig {
  double lambda2 = 1.0;
  bool tr_is_inner = false;
};

struct CompositeLossConfig {
  double gate_delta = 0.05;      // normalized-unit plausibility gate
  bool freeze_sp = false;        // skip springback-subnet updates in stage 2
  bool use_theory_term = true;   // false forces z = 0 (pure data loss)
  // z aggregates as the mean over the two output dims.

  void validate() const {
    if (gate_delta < 0.0)
      throw std::invalid_argument("CompositeLossConfig: gate_delta >= 0");
  }
};

struct PeNet {
  EsNet es;
  SpNet sp;
  TheoryConfig theory;
  CompositeLossConfig loss_cfg;
  nlohmann::ordered_json provenance = nlohmann::ordered_json::object();

  std::vector<std::string> input_names() const {
    std::vector<std::string> names = es.in_norm.names();
    const auto& sp_names = sp.in_norm.names();
    names.insert(names.end(), sp_names.begin() + 2, sp_names.end());
    return names;
  }

  void validate() const {
    es.validate();
    sp.validate();
    loss_cfg.validate();
    if (!(theory.lambda2 > 0.0))
      throw std::invalid_argument("PeNet: lambda2 must be > 0");
    if (es.out_norm.names() != std::vector<std::string>(
                                   sp.in_norm.names().begin(),
                                   sp.in_norm.names().begin() + 2))
      throw schema_error(
          "PeNet: shape-subnet output schema does not match the first two "
          "springback-subnet inputs");
  }
};

inline PeNet assemble(EsNet es, SpNet sp, TheoryConfig theory = {},
                      CompositeLossConfig loss_cfg = {}) {
  PeNet pe{std::move(es), std::move(sp), theory, loss_cfg, {}};
  pe.validate();
  return pe;
}

// ---------------------------------------------------------------------------
// Dynamic weight (stage-2 loss balance)

inline double dynamic_weight_from_deviation(std::span<const double> abs_dev,
                                            const CompositeLossConfig& cfg) {
  cfg.validate();
  if (abs_dev.empty())
    throw std::invalid_argument("dynamic_weight: empty deviation");
  double dmax = 0.0;
  for (double d : abs_dev) {
    if (!std::isfinite(d) || d < 0.0)
      throw std::invalid_argument("dynamic_weight: deviations must be finite and >= 0");
    dmax = std::max(dmax, d);
  }
  if (dmax <= cfg.gate_delta) return 0.0;
  // Mass of N(x, 1) on the interval [2x - f, f], symmetric about x with
  // half-width |d|: erf(|d| / sqrt(2)).
  double acc = 0.0;
  for (double d : abs_dev) acc += std::erf(d / std::numbers::sqrt2);
  return acc / static_cast<double>(abs_dev.size());
}

inline double dynamic_weight(std::span<const double> x_implicit,
                             std::span<const double> f_theory,
                             const CompositeLossConfig& cfg) {
  if (x_implicit.size() != f_theory.size())
    throw std::invalid_argument("dynamic_weight: size mismatch");
  std::vector<double> dev(x_implicit.size());
  for (std::size_t j = 0; j < dev.size(); ++j)
    dev[j] = std::abs(f_theory[j] - x_implicit[j]);
  return dynamic_weight_from_deviation(dev, cfg);
}

// ---------------------------------------------------------------------------
// Assembled forward pass

struct PeForwardResult {
  double y_norm = 0.0;                      // normalized springback
  double y_deg = 0.0;                       // denormalized springback (degrees)
  std::array<double, 2> implicit_norm{};    // shape-subnet output, normalized
  std::array<double, 2> implicit_phys{};    // equivalent (Do, T) in mm
};

namespace detail {

// The shape-subnet output feeds the first two springback-subnet inputs by
// denormalizing with the shape scales and renormalizing with the springback
// scales; the derivative of that affine chain is range ratio per component.
inline std::array<double, 2> glue_scale(const PeNet& pe) {
  return {pe.es.out_norm.range(0) / pe.sp.in_norm.range(0),
          pe.es.out_norm.range(1) / pe.sp.in_norm.range(1)};
}

// Springback-subnet input for a given implicit output and raw process tail.
inline std::vector<double> sp_input(const PeNet& pe, std::span<const double> v,
                                    std::span<const double> process_raw) {
  auto phys = pe.es.out_norm.invert(v);
  std::vector<double> in(2 + process_raw.size());
  in[0] = phys[0];
  in[1] = phys[1];
  for (std::size_t k = 0; k < process_raw.size(); ++k) in[2 + k] = process_raw[k];
  return pe.sp.in_norm.apply(in);
}

}  // namespace detail

// Raw input layout: (Do, T, Tr, process...). Process features are
// normalized by the springback subnet's own scales and pass the shape subnet
// by.
inline PeForwardResult pe_forward(const PeNet& pe, std::span<const double> x_raw) {
  std::size_t p = pe.sp.process_count();
  if (x_raw.size() != 3 + p)
    throw schema_error("pe_forward: expected 3 shape + " + std::to_string(p) +
                       " process features");
  auto u = pe.es.in_norm.apply(x_raw.subspan(0, 3));
  auto v = pe.es.mlp.forward(u);
  auto w = detail::sp_input(pe, v, x_raw.subspan(3));
  double y = pe.sp.mlp.forward(w)[0];
  PeForwardResult out;
  out.y_norm = y;
  out.y_deg = pe.sp.label_norm.invert1(y);
  out.implicit_norm = {v[0], v[1]};
  auto phys = pe.es.out_norm.invert(v);
  out.implicit_phys = {phys[0], phys[1]};
  return out;
}

// Theory target for a raw shape triple, in the shape-subnet output space.
inline std::array<double, 2> theory_normalized(const PeNet& pe,
                                               std::span<const double> shape_raw) {
  SingleShape eq = equivalent_tube(BmtShape{shape_raw[0], shape_raw[1], shape_raw[2]},
                                   pe.theory.lambda2, pe.theory.tr_is_inner);
  auto f = pe.es.out_norm.apply(std::array{eq.Do_eq, eq.T_eq});
  return {f[0], f[1]};
}

// Evaluation path with the shape subnet replaced by the exact theory map.
inline double pe_forward_with_theory(const PeNet& pe, std::span<const double> x_raw) {
  std::size_t p = pe.sp.process_count();
  if (x_raw.size() != 3 + p)
    throw schema_error("pe_forward_with_theory: input width mismatch");
  SingleShape eq = equivalent_tube(BmtShape{x_raw[0], x_raw[1], x_raw[2]},
                                   pe.theory.lambda2, pe.theory.tr_is_inner);
  std::vector<double> in(2 + p);
  in[0] = eq.Do_eq;
  in[1] = eq.T_eq;
  for (std::size_t k = 0; k < p; ++k) in[2 + k] = x_raw[3 + k];
  double y = pe.sp.mlp.forward(pe.sp.in_norm.apply(in))[0];
  return pe.sp.label_norm.invert1(y);
}

// ---------------------------------------------------------------------------
// Stage-2 composite training step

struct CompositeParts {
  double Lp = 0.0;  // theory-consistency loss (normalized)
  double Ld = 0.0;  // data loss (normalized)
  double z = 0.0;   // dynamic weight actually applied
};

namespace detail {

// Precomputed per-sample views of a bi-layer training set: normalized shape
// inputs, theory targets in the implicit-output space, raw process tails and
// normalized labels. Theory targets do not change during training.
struct Stage2Data {
  std::vector<std::vector<double>> es_in;     // n x 3, normalized
  std::vector<std::array<double, 2>> f_norm;  // theory targets
  std::vector<std::vector<double>> proc_raw;  // n x P
  std::vector<double> label_norm;

  static Stage2Data build(const PeNet& pe,
                          const std::vector<std::vector<double>>& rows,
                          const std::vector<double>& labels) {
    Stage2Data d;
    std::size_t p = pe.sp.process_count();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& row = rows[i];
      if (row.size() != 3 + p)
        throw schema_error("stage-2 data: row width mismatch");
      d.es_in.push_back(pe.es.in_norm.apply(std::span(row).subspan(0, 3)));
      d.f_norm.push_back(theory_normalized(pe, std::span(row).subspan(0, 3)));
      d.proc_raw.emplace_back(row.begin() + 3, row.end());
      d.label_norm.push_back(pe.sp.label_norm.apply1(labels[i]));
    }
    return d;
  }
};

// Loss parts of one batch without touching parameters. z is reported as the
// gated dynamic weight unless the config disables the theory term.
inline CompositeParts composite_losses(const PeNet& pe, const Stage2Data& data,
                                       std::span<const std::size_t> batch) {
  double B = static_cast<double>(batch.size());
  double lp_sse = 0.0, ld_sse = 0.0;
  std::array<double, 2> dev_sum{0.0, 0.0};
  for (std::size_t idx : batch) {
    auto v = pe.es.mlp.forward(data.es_in[idx]);
    for (std::size_t j = 0; j < 2; ++j) {
      double d = v[j] - data.f_norm[idx][j];
      lp_sse += d * d;
      dev_sum[j] += std::abs(d);
    }
    double y = pe.sp.mlp.forward(sp_input(pe, v, data.proc_raw[idx]))[0];
    double dy = y - data.label_norm[idx];
    ld_sse += dy * dy;
  }
  CompositeParts parts;
  parts.Lp = lp_sse / (2.0 * B);
  parts.Ld = ld_sse / B;
  if (pe.loss_cfg.use_theory_term) {
    std::array<double, 2> mean_dev{dev_sum[0] / B, dev_sum[1] / B};
    parts.z = dynamic_weight_from_deviation(mean_dev, pe.loss_cfg);
  }
  return parts;
}

struct CompositeGradients {
  Gradients es;
  Gradients sp;
  CompositeParts parts;
};

// Gradients of z*Lp + (1-z)*Ld over one batch, z frozen. The shape subnet
// receives the full combination, the springback subnet (1-z)*Ld only; z
// comes from the batch-mean absolute implicit deviation per output dim
// unless overridden.
inline CompositeGradients composite_gradients(
    const PeNet& pe, const Stage2Data& data, std::span<const std::size_t> batch,
    std::optional<double> z_override = {}) {
  if (batch.empty())
    throw std::invalid_argument("composite_gradients: empty batch");
  auto scale = glue_scale(pe);
  double B = static_cast<double>(batch.size());

  struct SampleCache {
    ForwardCache es;
    ForwardCache sp;
    double y;
  };
  std::vector<SampleCache> caches(batch.size());
  double lp_sse = 0.0, ld_sse = 0.0;
  std::array<double, 2> dev_sum{0.0, 0.0};
  for (std::size_t k = 0; k < batch.size(); ++k) {
    std::size_t idx = batch[k];
    auto v = forward_cached(pe.es.mlp, data.es_in[idx], caches[k].es);
    for (std::size_t j = 0; j < 2; ++j) {
      double d = v[j] - data.f_norm[idx][j];
      lp_sse += d * d;
      dev_sum[j] += std::abs(d);
    }
    caches[k].y =
        forward_cached(pe.sp.mlp, sp_input(pe, v, data.proc_raw[idx]), caches[k].sp)[0];
    double dy = caches[k].y - data.label_norm[idx];
    ld_sse += dy * dy;
  }

  CompositeGradients out{Gradients::zeros_like(pe.es.mlp),
                         Gradients::zeros_like(pe.sp.mlp), {}};
  out.parts.Lp = lp_sse / (2.0 * B);
  out.parts.Ld = ld_sse / B;
  if (!std::isfinite(out.parts.Lp) || !std::isfinite(out.parts.Ld))
    throw divergence_error("composite_gradients: non-finite loss", 0);
  if (z_override) {
    out.parts.z = *z_override;
  } else if (pe.loss_cfg.use_theory_term) {
    std::array<double, 2> mean_dev{dev_sum[0] / B, dev_sum[1] / B};
    out.parts.z = dynamic_weight_from_deviation(mean_dev, pe.loss_cfg);
  }
  double z = out.parts.z;

  std::vector<double> sp_in_grad;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    std::size_t idx = batch[k];
    double gy = 2.0 * (caches[k].y - data.label_norm[idx]) / B;
    backward(pe.sp.mlp, caches[k].sp, std::array{gy}, out.sp, &sp_in_grad);
    std::array<double, 2> gv{};
    const auto& v = caches[k].es.act.back();
    for (std::size_t j = 0; j < 2; ++j) {
      double g_data = sp_in_grad[j] * scale[j];
      double g_theory = (v[j] - data.f_norm[idx][j]) / B;  // d(Lp)/dv_j
      gv[j] = z * g_theory + (1.0 - z) * g_data;
    }
    backward(pe.es.mlp, caches[k].es, gv, out.es);
  }
  out.sp.scale(1.0 - z);
  return out;
}

// One composite minibatch update: gradients plus one Adam step per subnet.
inline CompositeParts composite_step(PeNet& pe, const Stage2Data& data,
                                     std::span<const std::size_t> batch,
                                     AdamState& es_state, AdamState& sp_state,
                                     double lr) {
  auto grads = composite_gradients(pe, data, batch);
  adam_step(pe.es.mlp, grads.es, es_state, lr);
  if (!pe.loss_cfg.freeze_sp) adam_step(pe.sp.mlp, grads.sp, sp_state, lr);
  return grads.parts;
}

}  // namespace detail

// Spec-level convenience: one composite update over a raw batch.
inline CompositeParts composite_step(PeNet& pe,
                                     const std::vector<std::vector<double>>& rows,
                                     const std::vector<double>& labels,
                                     AdamState& es_state, AdamState& sp_state,
                                     double lr) {
  auto data = detail::Stage2Data::build(pe, rows, labels);
  std::vector<std::size_t> all(rows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return detail::composite_step(pe, data, all, es_state, sp_state, lr);
}

// ---------------------------------------------------------------------------
// Stage 1: theory-driven pre-exploration of the shape subnet

struct PreExploreResult {
  EsNet net;
  double norm_rmse = 0.0;   // held-out RMSE in normalized space (both dims)
  double rmse_do_mm = 0.0;  // held-out RMSE of the equivalent diameter (mm)
  double rmse_t_mm = 0.0;   // held-out RMSE of the equivalent thickness (mm)
};

inline PreExploreResult pre_explore_esnet(Mlp es_mlp,
                                          const std::array<Interval, 3>& shape_bounds,
                                          std::size_t n_theory, double lambda2,
                                          const TrainConfig& cfg,
                                          bool tr_is_inner = false,
                                          double train_frac = 0.8) {
  if (n_theory < 5)
    throw std::invalid_argument("pre_explore_esnet: need at least 5 theory points");
  cfg.validate();
  auto points = lhs_sample(n_theory, shape_bounds, derive_seed(cfg.seed, 0xE51));
  std::vector<std::vector<double>> targets(n_theory, std::vector<double>(2));
  for (std::size_t i = 0; i < n_theory; ++i) {
    try {
      SingleShape eq = equivalent_tube(
          BmtShape{points[i][0], points[i][1], points[i][2]}, lambda2, tr_is_inner);
      targets[i] = {eq.Do_eq, eq.T_eq};
    } catch (const std::exception& e) {
      throw no_physical_solution(
          "pre_explore_esnet: equivalence failed at (Do=" +
          std::to_string(points[i][0]) + ", T=" + std::to_string(points[i][1]) +
          ", Tr=" + std::to_string(points[i][2]) + "): " + e.what());
    }
  }

  auto order = Rng(derive_seed(cfg.seed, 0xE52)).permutation(n_theory);
  auto n_train = static_cast<std::size_t>(
      std::ceil(static_cast<double>(n_theory) * train_frac));
  if (n_train == 0 || n_train >= n_theory)
    throw std::invalid_argument("pre_explore_esnet: split leaves an empty part");

  std::vector<std::vector<double>> x_train, y_train, x_test, y_test;
  for (std::size_t k = 0; k < n_theory; ++k) {
    auto& xs = k < n_train ? x_train : x_test;
    auto& ys = k < n_train ? y_train : y_test;
    xs.push_back(points[order[k]]);
    ys.push_back(targets[order[k]]);
  }

  EsNet net{std::move(es_mlp), Normalizer::fit(x_train, {"Do", "T", "Tr"}),
            Normalizer::fit(y_train, {"Do", "T"})};
  net.validate();

  std::vector<std::vector<double>> xn, yn;
  for (const auto& x : x_train) xn.push_back(net.in_norm.apply(x));
  for (const auto& y : y_train) yn.push_back(net.out_norm.apply(y));
  fit(net.mlp, xn, yn, cfg);

  PreExploreResult result{std::move(net), 0.0, 0.0, 0.0};
  double sse = 0.0, sse_do = 0.0, sse_t = 0.0;
  for (std::size_t i = 0; i < x_test.size(); ++i) {
    auto pred = result.net.mlp.forward(result.net.in_norm.apply(x_test[i]));
    auto tgt = result.net.out_norm.apply(y_test[i]);
    for (std::size_t j = 0; j < 2; ++j) {
      double d = pred[j] - tgt[j];
      sse += d * d;
    }
    auto phys = result.net.out_norm.invert(pred);
    sse_do += (phys[0] - y_test[i][0]) * (phys[0] - y_test[i][0]);
    sse_t += (phys[1] - y_test[i][1]) * (phys[1] - y_test[i][1]);
  }
  double n_test = static_cast<double>(x_test.size());
  result.norm_rmse = std::sqrt(sse / (2.0 * n_test));
  result.rmse_do_mm = std::sqrt(sse_do / n_test);
  result.rmse_t_mm = std::sqrt(sse_t / n_test);
  return result;
}

// ---------------------------------------------------------------------------
// Stage 1: data-driven pretraining of the springback subnet

struct PretrainResult {
  SpNet net;
  double test_rmse_deg = 0.0;
  double baseline_rmse_deg = 0.0;  // constant train-mean predictor on the test set
};

inline PretrainResult pretrain_spnet(Mlp sp_mlp, const Dataset& dataset1,
                                     const TrainConfig& cfg,
                                     double train_frac = 0.8) {
  cfg.validate();
  dataset1.validate();
  if (dataset1.feature_names.size() < 3 || dataset1.feature_names[0] != "Do" ||
      dataset1.feature_names[1] != "T")
    throw schema_error("pretrain_spnet: dataset must start with Do, T");
  if (sp_mlp.input_dim() != dataset1.feature_names.size() ||
      sp_mlp.output_dim() != 1)
    throw schema_error("pretrain_spnet: network shape does not match dataset");

  auto split = split_dataset(dataset1, train_frac, derive_seed(cfg.seed, 0x59));
  SpNet net{std::move(sp_mlp),
            Normalizer::fit(split.train.features, dataset1.feature_names),
            Normalizer::fit_column(split.train.labels, "springback")};
  net.validate();

  std::vector<std::vector<double>> xn, yn;
  for (const auto& x : split.train.features) xn.push_back(net.in_norm.apply(x));
  for (double label : split.train.labels)
    yn.push_back({net.label_norm.apply1(label)});
  fit(net.mlp, xn, yn, cfg);

  double train_mean = 0.0;
  for (double label : split.train.labels) train_mean += label;
  train_mean /= static_cast<double>(split.train.labels.size());

  double sse = 0.0, base_sse = 0.0;
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    double y = net.label_norm.invert1(
        net.mlp.forward(net.in_norm.apply(split.test.features[i]))[0]);
    double d = y - split.test.labels[i];
    sse += d * d;
    double b = train_mean - split.test.labels[i];
    base_sse += b * b;
  }
  double n_test = static_cast<double>(split.test.size());
  return {std::move(net), std::sqrt(sse / n_test), std::sqrt(base_sse / n_test)};
}

// ---------------------------------------------------------------------------
// Stage 2: fine-tuning on the small bi-layer dataset

struct FinetuneResult {
  double test_rmse_deg = 0.0;
  double initial_test_rmse_deg = 0.0;  // assembled-but-untuned, same split
  std::vector<CompositeParts> trace;   // per-epoch means
};

inline double evaluate_rmse(const PeNet& pe, const Dataset& ds) {
  if (ds.size() == 0) throw std::invalid_argument("evaluate_rmse: empty dataset");
  double sse = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    double d = pe_forward(pe, ds.features[i]).y_deg - ds.labels[i];
    sse += d * d;
  }
  return std::sqrt(sse / static_cast<double>(ds.size()));
}

inline void check_dataset2_schema(const PeNet& pe, const Dataset& ds) {
  auto expected = pe.input_names();
  if (ds.feature_names != expected) {
    std::string want;
    for (const auto& n : expected) want += n + " ";
    throw schema_error("fine-tune dataset schema mismatch; expected: " + want);
  }
}

// Fine-tune against an externally fixed train/test split. The batch harness
// uses this form so every ablation variant in a run sees the same split.
inline FinetuneResult finetune_split(PeNet& pe, const Dataset& train,
                                     const Dataset& test, const TrainConfig& cfg) {
  cfg.validate();
  check_dataset2_schema(pe, train);
  auto data = detail::Stage2Data::build(pe, train.features, train.labels);

  FinetuneResult result;
  result.initial_test_rmse_deg = evaluate_rmse(pe, test);

  AdamState es_state = AdamState::for_mlp(pe.es.mlp);
  AdamState sp_state = AdamState::for_mlp(pe.sp.mlp);
  Rng shuffle_rng(derive_seed(cfg.seed, 0xF8));
  std::size_t n = train.size();
  std::vector<std::size_t> order(n);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle_rng.shuffle(order);
    double lr = cfg.lr_at(epoch);
    CompositeParts mean;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.minibatch) {
      std::size_t stop = std::min(start + cfg.minibatch, n);
      std::span<const std::size_t> batch(order.data() + start, stop - start);
      CompositeParts parts;
      try {
        parts = detail::composite_step(pe, data, batch, es_state, sp_state, lr);
      } catch (const divergence_error& e) {
        throw divergence_error(std::string(e.what()) + " (fine-tune)", epoch);
      }
      mean.Lp += parts.Lp;
      mean.Ld += parts.Ld;
      mean.z += parts.z;
      ++batches;
    }
    mean.Lp /= static_cast<double>(batches);
    mean.Ld /= static_cast<double>(batches);
    mean.z /= static_cast<double>(batches);
    result.trace.push_back(mean);
  }

  result.test_rmse_deg = evaluate_rmse(pe, test);
  return result;
}

inline FinetuneResult finetune(PeNet& pe, const Dataset& dataset2,
                               const TrainConfig& cfg, double train_frac = 0.8) {
  dataset2.validate();
  auto split = split_dataset(dataset2, train_frac, derive_seed(cfg.seed, 0xF7));
  return finetune_split(pe, split.train, split.test, cfg);
}

// ---------------------------------------------------------------------------
// Prediction and persistence

struct Prediction {
  double springback_deg = 0.0;
  bool out_of_range = false;  // input left the fitted normalizer ranges
};

inline Prediction predict(const PeNet& pe, std::span<const double> x_raw) {
  std::size_t p = pe.sp.process_count();
  if (x_raw.size() != 3 + p)
    throw schema_error("predict: expected " + std::to_string(3 + p) + " features");
  Prediction out;
  out.springback_deg = pe_forward(pe, x_raw).y_deg;
  out.out_of_range = !pe.es.in_norm.in_range(x_raw.subspan(0, 3));
  for (std::size_t k = 0; k < p && !out.out_of_range; ++k) {
    double v = x_raw[3 + k];
    if (v < pe.sp.in_norm.mins()[2 + k] || v > pe.sp.in_norm.maxs()[2 + k])
      out.out_of_range = true;
  }
  return out;
}

inline nlohmann::ordered_json esnet_to_json(const EsNet& net) {
  return {{"kind", "es-net"},
          {"mlp", mlp_to_json(net.mlp)},
          {"in_norm", normalizer_to_json(net.in_norm)},
          {"out_norm", normalizer_to_json(net.out_norm)}};
}

inline EsNet esnet_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "es-net")
    throw schema_error("esnet_from_json: kind must be 'es-net'");
  EsNet net{mlp_from_json(j.at("mlp")), normalizer_from_json(j.at("in_norm")),
            normalizer_from_json(j.at("out_norm"))};
  net.validate();
  return net;
}

inline nlohmann::ordered_json spnet_to_json(const SpNet& net) {
  return {{"kind", "sp-net"},
          {"mlp", mlp_to_json(net.mlp)},
          {"in_norm", normalizer_to_json(net.in_norm)},
          {"label_norm", normalizer_to_json(net.label_norm)}};
}

inline SpNet spnet_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "sp-net")
    throw schema_error("spnet_from_json: kind must be 'sp-net'");
  SpNet net{mlp_from_json(j.at("mlp")), normalizer_from_json(j.at("in_norm")),
            normalizer_from_json(j.at("label_norm"))};
  net.validate();
  return net;
}

inline nlohmann::ordered_json penet_to_json(const PeNet& pe) {
  nlohmann::ordered_json j;
  j["kind"] = "pe-net";
  j["es"] = esnet_to_json(pe.es);
  j["sp"] = spnet_to_json(pe.sp);
  j["theory"] = {{"lambda2", pe.theory.lambda2},
                 {"tr_is_inner", pe.theory.tr_is_inner}};
  j["composite_loss"] = {{"gate_delta", pe.loss_cfg.gate_delta},
                         {"freeze_sp", pe.loss_cfg.freeze_sp},
                         {"use_theory_term", pe.loss_cfg.use_theory_term},
                         {"z_aggregation", "mean"}};
  j["provenance"] = pe.provenance;
  return j;
}

inline PeNet penet_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "pe-net")
    throw schema_error("penet_from_json: kind must be 'pe-net'");
  PeNet pe;
  pe.es = esnet_from_json(j.at("es"));
  pe.sp = spnet_from_json(j.at("sp"));
  pe.theory.lambda2 = j.at("theory").at("lambda2").get<double>();
  pe.theory.tr_is_inner = j.at("theory").value("tr_is_inner", false);
  const auto& loss = j.at("composite_loss");
  pe.loss_cfg.gate_delta = loss.at("gate_delta").get<double>();
  pe.loss_cfg.freeze_sp = loss.value("freeze_sp", false);
  pe.loss_cfg.use_theory_term = loss.value("use_theory_term", true);
  if (loss.value("z_aggregation", "mean") != std::string("mean"))
    throw schema_error("penet_from_json: unsupported z aggregation");
  pe.provenance = j.value("provenance", nlohmann::json::object());
  pe.validate();
  return pe;
}

inline void save_penet(const PeNet& pe, const std::string& path) {
  write_json_file(penet_to_json(pe), path);
}

inline PeNet load_penet(const std::string& path) {
  return penet_from_json(read_json_file(path));
}

}  // namespace penet
