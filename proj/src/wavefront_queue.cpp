#include "iwpp/wavefront_queue.hpp"

#include <string>

namespace iwpp {

std::string_view to_string(QueueStrategy s) {
  switch (s) {
    case QueueStrategy::Naive:
      return "naive";
    case QueueStrategy::PrefixSum:
      return "prefix";
    case QueueStrategy::PerWorker:
      return "perworker";
  }
  return "?";
}

QueueStrategy parse_queue_strategy(std::string_view name) {
  if (name == "naive") return QueueStrategy::Naive;
  if (name == "prefix") return QueueStrategy::PrefixSum;
  if (name == "perworker") return QueueStrategy::PerWorker;
  throw UsageError("unknown queue strategy '" + std::string(name) + "'");
}

}  // namespace iwpp
