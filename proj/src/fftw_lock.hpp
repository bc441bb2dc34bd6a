#pragma once

#include <mutex>

namespace blowup_lab {

// FFTW planning is not thread-safe; execution on new arrays is.
std::mutex& fftw_planner_mutex();

}  // namespace blowup_lab
