#pragma once

#include <mutex>

namespace ldplab::detail {

// FFTW planner calls (plan creation and destruction) are not thread-safe;
// every planner call in the library goes through this lock.
std::mutex& fftw_planner_mutex();

}  // namespace ldplab::detail
