#include "qkdfr/kernels.hpp"

#include <exception>

#include <omp.h>

namespace qkdfr::kernels {

RMatrix assemble_columns_serial(Index rows, Index cols, const ColumnFn& column_fn) {
  RMatrix out(rows, cols);
  for (Index j = 0; j < cols; ++j) out.col(j) = column_fn(j);
  return out;
}

RMatrix assemble_columns_parallel(Index rows, Index cols, const ColumnFn& column_fn) {
  RMatrix out(rows, cols);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
  for (Index j = 0; j < cols; ++j) {
    try {
      out.col(j) = column_fn(j);
    } catch (...) {
#pragma omp critical(qkdfr_kernel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace qkdfr::kernels
