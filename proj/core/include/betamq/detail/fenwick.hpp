#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace betamq::detail {

/// Fenwick tree over positions 1..capacity counting present labels.
/// prefix(k) = number of present positions <= k, in O(log capacity).
class Fenwick {
   public:
    Fenwick() = default;
    explicit Fenwick(std::size_t capacity) : tree_(capacity + 1, 0) {}

    std::size_t capacity() const { return tree_.empty() ? 0 : tree_.size() - 1; }

    void ensure_capacity(std::size_t pos) {
        if (pos <= capacity()) return;
        std::size_t cap = capacity() == 0 ? 1024 : capacity();
        while (cap < pos) cap *= 2;
        // Rebuild from scratch: dump current counts, re-add into the wider tree.
        std::vector<std::int32_t> counts(cap + 1, 0);
        for (std::size_t k = capacity(); k >= 1; --k) {
            std::int32_t c = at(k);
            if (c != 0) counts[k] = c;
        }
        tree_.assign(cap + 1, 0);
        for (std::size_t k = 1; k <= cap; ++k) {
            if (counts[k] != 0) add(k, counts[k]);
        }
    }

    void add(std::size_t pos, std::int32_t delta) {
        assert(pos >= 1 && pos <= capacity());
        for (std::size_t i = pos; i < tree_.size(); i += i & (~i + 1)) {
            tree_[i] += delta;
        }
    }

    /// Count of present positions in [1, pos]; pos may exceed capacity.
    std::int64_t prefix(std::size_t pos) const {
        if (pos > capacity()) pos = capacity();
        std::int64_t sum = 0;
        for (std::size_t i = pos; i > 0; i -= i & (~i + 1)) {
            sum += tree_[i];
        }
        return sum;
    }

    std::int32_t at(std::size_t pos) const {
        return static_cast<std::int32_t>(prefix(pos) - prefix(pos - 1));
    }

    std::int64_t total() const { return prefix(capacity()); }

   private:
    std::vector<std::int32_t> tree_;
};

}  // namespace betamq::detail
