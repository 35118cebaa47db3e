#pragma once

namespace cortigraph {

// Batch kernels come in two flavours: an OpenMP version used by the
// pipeline and a plain loop kept as the reference the tests compare against.
enum class Exec { parallel, serial };

// Worker cap from CORTIGRAPH_THREADS (unset or invalid -> OpenMP default).
int configured_threads();

// Applies configured_threads() to the OpenMP runtime. Called once by the CLI.
void apply_thread_limit();

}  // namespace cortigraph
