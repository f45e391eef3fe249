#pragma once

#include <functional>

#include "qkdfr/hermitian.hpp"

namespace qkdfr::kernels {

/// Column j of the result is column_fn(j), for j in [0, cols).
/// Each column is computed independently, so both variants give identical bits.
using ColumnFn = std::function<RVector(Index)>;

RMatrix assemble_columns_serial(Index rows, Index cols, const ColumnFn& column_fn);
RMatrix assemble_columns_parallel(Index rows, Index cols, const ColumnFn& column_fn);

inline RMatrix assemble_columns(Index rows, Index cols, const ColumnFn& column_fn, bool parallel) {
  return parallel ? assemble_columns_parallel(rows, cols, column_fn)
                  : assemble_columns_serial(rows, cols, column_fn);
}

/// Worker count OpenMP would use for the parallel variant.
int max_threads();

}  // namespace qkdfr::kernels
