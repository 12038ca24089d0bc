#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmtau {

class Partition {
public:
    Partition() = default;
    Partition(std::initializer_list<int> p) : Partition(std::vector<int>(p)) {}
    explicit Partition(std::vector<int> p) : parts_(std::move(p))
    {
        while (!parts_.empty() && parts_.back() == 0) parts_.pop_back();
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (parts_[i] < 0) throw std::invalid_argument("partition has a negative part");
            if (i > 0 && parts_[i] > parts_[i - 1])
                throw std::invalid_argument("partition parts must be weakly decreasing");
        }
        weight_ = std::accumulate(parts_.begin(), parts_.end(), 0);
    }

    const std::vector<int>& parts() const { return parts_; }
    int weight() const { return weight_; }
    int length() const { return static_cast<int>(parts_.size()); }
    bool empty() const { return parts_.empty(); }
    // zero-padded access
    int operator[](std::size_t i) const { return i < parts_.size() ? parts_[i] : 0; }

    bool all_parts_even() const
    {
        return std::all_of(parts_.begin(), parts_.end(), [](int p) { return p % 2 == 0; });
    }

    std::string str() const
    {
        std::string s = "(";
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(parts_[i]);
        }
        return s + ")";
    }

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::vector<int> parts_;
    int weight_ = 0;
};

// (weight, then larger parts first)
inline bool canonical_less(const Partition& a, const Partition& b)
{
    if (a.weight() != b.weight()) return a.weight() < b.weight();
    return std::lexicographical_compare(b.parts().begin(), b.parts().end(),
                                        a.parts().begin(), a.parts().end());
}

struct CanonicalLess {
    bool operator()(const Partition& a, const Partition& b) const { return canonical_less(a, b); }
};

namespace detail {
inline void partitions_of(int n, int max_part, int max_len, std::vector<int>& cur,
                          std::vector<Partition>& out)
{
    if (n == 0) {
        out.emplace_back(cur);
        return;
    }
    if (static_cast<int>(cur.size()) == max_len) return;
    for (int p = std::min(n, max_part); p >= 1; --p) {
        cur.push_back(p);
        partitions_of(n - p, p, max_len, cur, out);
        cur.pop_back();
    }
}
} // namespace detail

inline std::vector<Partition> partitions_of_weight(int n, int max_length)
{
    std::vector<Partition> out;
    if (n < 0 || max_length < 0) return out;
    std::vector<int> cur;
    detail::partitions_of(n, n, max_length, cur, out);
    return out;
}

inline std::vector<Partition> enumerate_partitions(int max_weight, int max_length)
{
    if (max_weight < 0 || max_length < 0)
        throw std::invalid_argument("enumerate_partitions: bounds must be nonnegative");
    std::vector<Partition> out;
    for (int w = 0; w <= max_weight; ++w) {
        auto layer = partitions_of_weight(w, max_length);
        out.insert(out.end(), layer.begin(), layer.end());
    }
    return out;
}

inline std::vector<int> shifted_indices(const Partition& lam, int N)
{
    if (N < 0 || lam.length() > N)
        throw std::invalid_argument("shifted_indices: partition longer than N");
    std::vector<int> h(N);
    for (int i = 0; i < N; ++i) h[i] = lam[i] - (i + 1) + N;
    return h;
}

inline Partition conjugate(const Partition& lam)
{
    std::vector<int> c(lam.empty() ? 0 : lam[0], 0);
    for (int p : lam.parts())
        for (int j = 0; j < p; ++j) ++c[j];
    return Partition(std::move(c));
}

} // namespace rmtau
