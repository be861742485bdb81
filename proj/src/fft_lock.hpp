#pragma once

// FFTW planning is not thread safe; every plan create/destroy goes through this lock.

#include <mutex>

namespace olp::detail {

inline std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace olp::detail
