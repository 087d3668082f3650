#pragma once

#include <cmath>

namespace kw {

// Neumaier compensated accumulator. All atom expectations go through this so
// the 1e-12 moment identities survive tens of thousands of terms.
class ksum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace kw
