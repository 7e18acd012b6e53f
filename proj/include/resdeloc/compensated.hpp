#pragma once

#include <cmath>

namespace resdeloc {

// Neumaier's variant of Kahan summation: stays compensated when the
// incoming term is larger than the running sum.
struct CompensatedSum {
    double sum = 0.0;
    double compensation = 0.0;

    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            compensation += (sum - t) + x;
        else
            compensation += (x - t) + sum;
        sum = t;
    }

    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }

    double value() const { return sum + compensation; }
};

}  // namespace resdeloc
