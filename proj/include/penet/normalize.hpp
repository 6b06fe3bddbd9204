// Min-max feature scaling to [0,1], fitted on training data only. Values
// outside the fitted range map outside [0,1] without clipping.
#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "penet/errors.hpp"

namespace penet {

class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(std::vector<double> mins, std::vector<double> maxs,
             std::vector<std::string> names)
      : mins_(std::move(mins)), maxs_(std::move(maxs)), names_(std::move(names)) {
    if (mins_.size() != maxs_.size() ||
        (!names_.empty() && names_.size() != mins_.size()))
      throw schema_error("Normalizer: inconsistent field sizes");
    for (std::size_t c = 0; c < mins_.size(); ++c)
      if (!(maxs_[c] > mins_[c]))
        throw std::invalid_argument("Normalizer: max must exceed min (" +
                                    name_of(c) + ")");
  }

  static Normalizer fit(const std::vector<std::vector<double>>& rows,
                        std::vector<std::string> names = {}) {
    if (rows.size() < 2)
      throw std::invalid_argument("Normalizer::fit: need at least 2 rows");
    std::size_t dim = rows.front().size();
    std::vector<double> mins(rows.front()), maxs(rows.front());
    for (const auto& row : rows) {
      if (row.size() != dim)
        throw schema_error("Normalizer::fit: ragged rows");
      for (std::size_t c = 0; c < dim; ++c) {
        mins[c] = std::min(mins[c], row[c]);
        maxs[c] = std::max(maxs[c], row[c]);
      }
    }
    for (std::size_t c = 0; c < dim; ++c)
      if (!(maxs[c] > mins[c])) {
        std::string name = names.empty() ? "column " + std::to_string(c) : names[c];
        throw std::invalid_argument("Normalizer::fit: constant feature: " + name);
      }
    return Normalizer(std::move(mins), std::move(maxs), std::move(names));
  }

  static Normalizer fit_column(std::span<const double> values,
                               const std::string& name) {
    std::vector<std::vector<double>> rows;
    rows.reserve(values.size());
    for (double v : values) rows.push_back({v});
    return fit(rows, {name});
  }

  std::size_t size() const { return mins_.size(); }
  const std::vector<double>& mins() const { return mins_; }
  const std::vector<double>& maxs() const { return maxs_; }
  const std::vector<std::string>& names() const { return names_; }
  double range(std::size_t c) const { return maxs_[c] - mins_[c]; }

  std::vector<double> apply(std::span<const double> x) const {
    check(x.size());
    std::vector<double> out(x.size());
    for (std::size_t c = 0; c < x.size(); ++c)
      out[c] = (x[c] - mins_[c]) / (maxs_[c] - mins_[c]);
    return out;
  }

  std::vector<double> invert(std::span<const double> u) const {
    check(u.size());
    std::vector<double> out(u.size());
    for (std::size_t c = 0; c < u.size(); ++c)
      out[c] = u[c] * (maxs_[c] - mins_[c]) + mins_[c];
    return out;
  }

  double apply1(double x) const { return apply(std::span(&x, 1))[0]; }
  double invert1(double u) const { return invert(std::span(&u, 1))[0]; }

  bool in_range(std::span<const double> x) const {
    check(x.size());
    for (std::size_t c = 0; c < x.size(); ++c)
      if (x[c] < mins_[c] || x[c] > maxs_[c]) return false;
    return true;
  }

 private:
  std::string name_of(std::size_t c) const {
    return names_.empty() ? "column " + std::to_string(c) : names_[c];
  }
  void check(std::size_t n) const {
    if (n != mins_.size())
      throw schema_error("Normalizer: dimension mismatch");
  }

  std::vector<double> mins_;
  std::vector<double> maxs_;
  std::vector<std::string> names_;
};

}  // namespace penet
