#pragma once

#include <cmath>
#include <limits>

namespace mdm {

// Streaming log(sum_i s_i exp(t_i)) with s_i in {-1, +1}, rescaled on a running maximum.
class SignedLogSumExp {
public:
    void add(double log_term, double sign = 1.0) {
        if (log_term == -std::numeric_limits<double>::infinity()) return;
        if (log_term > shift_) {
            sum_ *= std::exp(shift_ - log_term);
            shift_ = log_term;
        }
        sum_ += sign * std::exp(log_term - shift_);
    }

    // Scaled sum; the represented value is scaled_sum() * exp(shift()).
    double scaled_sum() const { return sum_; }
    double shift() const { return shift_; }

    bool positive() const { return sum_ > 0.0; }

    // Only meaningful when positive().
    double log_value() const { return shift_ + std::log(sum_); }

    double value() const { return sum_ * std::exp(shift_); }

private:
    double shift_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
};

} // namespace mdm
