#pragma once

#include <algorithm>
#include <initializer_list>
#include <string>
#include <string_view>

namespace imk {

/// Strength of a verdict. Ordered from strongest to weakest; aggregation
/// always keeps the weakest grade that contributed.
enum class Grade { Proven = 0, Sampled = 1, Unknown = 2, Failed = 3 };

inline Grade weakest(Grade a, Grade b) { return std::max(a, b); }

inline Grade weakest(std::initializer_list<Grade> gs) {
  Grade g = Grade::Proven;
  for (Grade x : gs) g = weakest(g, x);
  return g;
}

inline std::string_view to_string(Grade g) {
  switch (g) {
    case Grade::Proven: return "Proven";
    case Grade::Sampled: return "Sampled";
    case Grade::Unknown: return "Unknown";
    case Grade::Failed: return "Failed";
  }
  return "Unknown";
}

}  // namespace imk
