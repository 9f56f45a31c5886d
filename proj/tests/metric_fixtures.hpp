#pragma once

#include <cmath>

#include "sslt/imaging.hpp"

// Fixtures mirrored in tests/oracles/fixtures.py.
namespace sslt::test {

inline Mask ellipse_gt() {
    Mask m(12, 9);
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 12; ++x) m(x, y) = (x - 5.0) * (x - 5.0) / 16.0 + (y - 4.0) * (y - 4.0) / 9.0 < 1.0;
    return m;
}

inline ScalarMap wave_map() {
    ScalarMap m(12, 9);
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 12; ++x) m(x, y) = 0.5 + 0.5 * std::sin(1.3 * x + 0.7 * y);
    return m;
}

inline ScalarMap ramp_map() {
    ScalarMap m(16, 10);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 16; ++x) m(x, y) = (x + 2.0 * y) / (15.0 + 18.0);
    return m;
}

inline ScalarMap as_map(const Mask& m) {
    ScalarMap s(m.width(), m.height());
    for (std::size_t i = 0; i < m.size(); ++i) s.data()[i] = m.data()[i] ? 1.0 : 0.0;
    return s;
}

}  // namespace sslt::test
