#pragma once

#include <cmath>

namespace duplex {

// Power in watts.  Decibel-watts only appear at the configuration layer.
struct Watts {
    double value = 0.0;
};

inline Watts dbw_to_watts(double dbw) { return {std::pow(10.0, dbw / 10.0)}; }
inline double watts_to_dbw(Watts w) { return 10.0 * std::log10(w.value); }

}  // namespace duplex
