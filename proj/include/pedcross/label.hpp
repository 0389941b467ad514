#pragma once

#include <string>

#include "pedcross/errors.hpp"

namespace pedcross {

/// The binary decision about a pedestrian: crossing or not crossing the
/// ego-vehicle's path.
enum class CrossLabel { NC = 0, C = 1 };

inline const char* to_string(CrossLabel label) {
    return label == CrossLabel::C ? "C" : "NC";
}

inline CrossLabel cross_label_from_string(const std::string& s) {
    if (s == "C") return CrossLabel::C;
    if (s == "NC") return CrossLabel::NC;
    throw UnknownLabel("not a C/NC label: " + s);
}

}  // namespace pedcross
