#pragma once

#include <functional>
#include <string>

#include "kpplab/common.hpp"

namespace kpplab {

/// Reaction term together with its first two derivatives.
/// Valid entries satisfy f(0) = f(1) = 0, f'(0) > 0, f'(1) < 0 and
/// f'' < 0 on (0,1).
struct Nonlinearity {
    std::string name;
    std::function<double(double)> f;
    std::function<double(double)> f1;
    std::function<double(double)> f2;
};

/// Closed-form registry. "kpp" is u(1-u); "cubic" is u - u^3.
inline Nonlinearity make_nonlinearity(const std::string& name) {
    if (name == "kpp") {
        return {"kpp",
                [](double u) { return u * (1.0 - u); },
                [](double u) { return 1.0 - 2.0 * u; },
                [](double) { return -2.0; }};
    }
    if (name == "cubic") {
        return {"cubic",
                [](double u) { return u - u * u * u; },
                [](double u) { return 1.0 - 3.0 * u * u; },
                [](double u) { return -6.0 * u; }};
    }
    throw std::invalid_argument("unknown nonlinearity: " + name);
}

} // namespace kpplab
