#include <algorithm>
#include <stdexcept>

#include "cloudrca/tsdetect.hpp"

namespace cloudrca {

RobustWindow::RobustWindow(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("window capacity must be positive");
    sorted_.reserve(capacity);
}

void RobustWindow::update(double value) {
    if (fifo_.size() == capacity_) {
        const double oldest = fifo_.front();
        fifo_.pop_front();
        sorted_.erase(std::lower_bound(sorted_.begin(), sorted_.end(), oldest));
    }
    fifo_.push_back(value);
    sorted_.insert(std::upper_bound(sorted_.begin(), sorted_.end(), value), value);
}

double RobustWindow::median() const {
    if (sorted_.empty()) throw std::logic_error("median of an empty window");
    const std::size_t n = sorted_.size();
    if (n % 2 == 1) return sorted_[n / 2];
    return 0.5 * (sorted_[n / 2 - 1] + sorted_[n / 2]);
}

double RobustWindow::mad() const {
    const double med = median();
    const std::size_t n = sorted_.size();
    // Deviations left of the median grow leftwards, those right of it grow rightwards:
    // merge the two sorted runs until the middle element(s) are reached.
    const auto split = static_cast<std::size_t>(std::lower_bound(sorted_.begin(), sorted_.end(), med) - sorted_.begin());
    std::size_t l = split, r = split;  // next candidates: sorted_[l - 1] and sorted_[r]
    const std::size_t want_hi = n / 2;
    const std::size_t want_lo = n % 2 == 1 ? n / 2 : n / 2 - 1;
    double lo_val = 0.0, cur = 0.0;
    for (std::size_t k = 0; k <= want_hi; ++k) {
        const bool take_left =
            l > 0 && (r >= n || med - sorted_[l - 1] <= sorted_[r] - med);
        if (take_left) {
            cur = med - sorted_[l - 1];
            --l;
        } else {
            cur = sorted_[r] - med;
            ++r;
        }
        if (k == want_lo) lo_val = cur;
    }
    return n % 2 == 1 ? cur : 0.5 * (lo_val + cur);
}

RobustWindow update_window(RobustWindow w, double value) {
    w.update(value);
    return w;
}

}  // namespace cloudrca
