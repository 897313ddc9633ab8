#pragma once

namespace aci {

/// Selects between the serial reference path of a kernel and its OpenMP path.
/// Both paths produce identical results unless a kernel documents otherwise.
enum class Execution { kSerial, kParallel };

/// Number of worker threads the parallel paths would use (1 without OpenMP).
int max_threads() noexcept;

}  // namespace aci
