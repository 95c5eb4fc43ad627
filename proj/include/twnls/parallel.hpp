#pragma once

namespace twnls {

/// Caps the worker count used by parallel loops. Values < 1 restore the default.
void set_thread_count(int n);
int thread_count();

}  // namespace twnls
