#pragma once

#include <atomic>

namespace iwpp {

/// Installs `proposed` into `cell` if better(proposed, current) holds, retrying on
/// concurrent modification. Returns the value held immediately before the operation
/// that decided the outcome; the caller's merge changed the cell iff better(proposed, prior).
///
/// With a max order this is atomicMax; with a general order it is the CAS repeat-until loop.
template <typename V, typename Better>
V atomic_merge(V& cell, V proposed, Better&& better) {
  std::atomic_ref<V> ref(cell);
  V current = ref.load(std::memory_order_relaxed);
  while (better(proposed, current)) {
    if (ref.compare_exchange_weak(current, proposed, std::memory_order_relaxed)) break;
  }
  return current;
}

template <typename V>
V atomic_load(const V& cell) {
  return std::atomic_ref<V>(const_cast<V&>(cell)).load(std::memory_order_relaxed);
}

template <typename V>
void atomic_store(V& cell, V value) {
  std::atomic_ref<V>(cell).store(value, std::memory_order_relaxed);
}

}  // namespace iwpp
