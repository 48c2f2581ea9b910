#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "kbgan/models.hpp"

namespace kbgan::testing {

using RowList = std::vector<std::pair<TableId, EntityId>>;

inline RowList unique_rows(RowList rows) {
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

/// Central differences of `f` with respect to every coordinate of `rows`.
inline SparseGradient<double> numeric_gradient(ModelParams<double>& p, const RowList& rows,
                                               const std::function<double(const ModelParams<double>&)>& f,
                                               double step = 1e-5) {
  SparseGradient<double> out;
  for (auto [table, row] : unique_rows(rows)) {
    RowVector<double> g(p.spec.width());
    for (int j = 0; j < p.spec.width(); ++j) {
      double& x = p.table(table)(row, j);
      const double saved = x;
      x = saved + step;
      const double up = f(p);
      x = saved - step;
      const double down = f(p);
      x = saved;
      g(j) = (up - down) / (2 * step);
    }
    out.add(table, row, g);
  }
  return out;
}

/// ||a - b|| / max(||a||, ||b||) over the listed rows; 0 when both vanish.
inline double relative_error(const SparseGradient<double>& a, const SparseGradient<double>& b, const RowList& rows,
                             int width) {
  double diff = 0, na = 0, nb = 0;
  const RowVector<double> zero = RowVector<double>::Zero(width);
  for (auto [table, row] : unique_rows(rows)) {
    const auto* ga = a.find(table, row);
    const auto* gb = b.find(table, row);
    const RowVector<double>& va = ga ? *ga : zero;
    const RowVector<double>& vb = gb ? *gb : zero;
    diff += (va - vb).squaredNorm();
    na += va.squaredNorm();
    nb += vb.squaredNorm();
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0 ? 0.0 : std::sqrt(diff) / scale;
}

/// Smallest |component| of the translation residual, for keeping L1 checks off kinks.
inline double min_abs_residual(const ModelParams<double>& p, const Triple& x) {
  return detail::translation_residual(p, x).cwiseAbs().minCoeff();
}

}  // namespace kbgan::testing
