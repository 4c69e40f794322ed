#include "jm/poset.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>

namespace jm {

bool less_than(PartialOrder order, std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("less_than: dimension mismatch");
    }
    switch (order) {
        case PartialOrder::MaxNorm: {
            const double na = a.empty() ? 0.0 : *std::max_element(a.begin(), a.end());
            const double nb = b.empty() ? 0.0 : *std::max_element(b.begin(), b.end());
            return na < nb;
        }
        case PartialOrder::Product: {
            bool differs = false;
            for (std::size_t k = 0; k < a.size(); ++k) {
                if (a[k] > b[k]) return false;
                differs = differs || a[k] != b[k];
            }
            return differs;
        }
        case PartialOrder::Empty:
            break;
    }
    return false;
}

namespace {

using Word = std::uint64_t;
constexpr std::size_t kBits = 64;

// Lower covers for every node, given a linear extension `ext` (if a < b then a
// precedes b) and the strict relation `less`. Down-sets are stored as bitsets over
// extension positions; each node's covers are found by scanning its down-set from
// the top and discarding everything already reachable through a found cover.
template <class Less>
std::vector<std::vector<std::size_t>> lower_covers(const std::vector<std::size_t>& ext, Less&& less) {
    const std::size_t n = ext.size();
    const std::size_t words = (n + kBits - 1) / kBits;
    std::vector<Word> down(n * words, 0);
    for (std::size_t j = 0; j < n; ++j) {
        Word* dj = down.data() + j * words;
        for (std::size_t i = 0; i < j; ++i) {
            if (less(ext[i], ext[j])) {
                dj[i / kBits] |= Word{1} << (i % kBits);
            }
        }
    }

    std::vector<std::vector<std::size_t>> covers(n);
    std::vector<Word> reach(words, 0);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == 0) continue;
        const Word* dj = down.data() + j * words;
        const std::size_t top = (j - 1) / kBits;
        std::fill(reach.begin(), reach.begin() + static_cast<std::ptrdiff_t>(top + 1), 0);
        for (std::size_t w = top + 1; w-- > 0;) {
            Word bits = dj[w] & ~reach[w];
            while (bits != 0) {
                const unsigned b = static_cast<unsigned>(kBits - 1 - std::countl_zero(bits));
                const std::size_t u = w * kBits + b;
                covers[ext[j]].push_back(ext[u]);
                const Word* du = down.data() + u * words;
                for (std::size_t x = 0; x <= w; ++x) {
                    reach[x] |= du[x];
                }
                const Word below = b == 0 ? Word{0} : ((Word{1} << b) - 1);
                bits = dj[w] & ~reach[w] & below;
            }
        }
    }
    return covers;
}

}  // namespace

PosetIndex PosetIndex::from_covers(std::vector<std::vector<std::size_t>> covers) {
    PosetIndex index;
    const std::size_t n = covers.size();
    index.offsets_.assign(n + 1, 0);
    index.in_degree_.assign(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
        std::sort(covers[v].begin(), covers[v].end());
        index.offsets_[v + 1] = index.offsets_[v] + covers[v].size();
    }
    index.targets_.reserve(index.offsets_[n]);
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t c : covers[v]) {
            index.targets_.push_back(c);
            ++index.in_degree_[c];
        }
    }
    index.alive_.assign(n, 1);
    index.live_ = n;
    index.root_pos_.assign(n, kNotRoot);
    for (std::size_t v = 0; v < n; ++v) {
        if (index.in_degree_[v] == 0) index.add_root(v);
    }
    return index;
}

PosetIndex PosetIndex::from_norm_groups(const Matrix& points) {
    PosetIndex index;
    index.grouped_ = true;
    const std::size_t n = points.rows();
    std::vector<double> norm(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = points.row(i);
        norm[i] = row.empty() ? 0.0 : *std::max_element(row.begin(), row.end());
    }
    index.order_.resize(n);
    std::iota(index.order_.begin(), index.order_.end(), std::size_t{0});
    std::stable_sort(index.order_.begin(), index.order_.end(),
                     [&](std::size_t a, std::size_t b) { return norm[a] > norm[b]; });
    index.group_of_.assign(n, 0);
    for (std::size_t pos = 0; pos < n; ++pos) {
        if (pos == 0 || norm[index.order_[pos]] != norm[index.order_[pos - 1]]) {
            index.group_start_.push_back(pos);
        }
        index.group_of_[index.order_[pos]] = index.group_start_.size() - 1;
    }
    index.group_start_.push_back(n);
    const std::size_t groups = index.group_start_.size() - 1;
    index.group_left_.resize(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        index.group_left_[g] = index.group_start_[g + 1] - index.group_start_[g];
    }
    index.alive_.assign(n, 1);
    index.live_ = n;
    index.root_pos_.assign(n, kNotRoot);
    if (groups > 0) {
        for (std::size_t pos = index.group_start_[0]; pos < index.group_start_[1]; ++pos) {
            index.add_root(index.order_[pos]);
        }
    }
    return index;
}

PosetIndex PosetIndex::build(const Matrix& points, PartialOrder order) {
    const std::size_t n = points.rows();
    switch (order) {
        case PartialOrder::MaxNorm:
            return from_norm_groups(points);
        case PartialOrder::Empty:
            return from_covers(std::vector<std::vector<std::size_t>>(n));
        case PartialOrder::Product:
            break;
    }
    // Lexicographic order is a linear extension of the product order.
    std::vector<std::size_t> ext(n);
    std::iota(ext.begin(), ext.end(), std::size_t{0});
    std::sort(ext.begin(), ext.end(), [&](std::size_t a, std::size_t b) {
        const auto ra = points.row(a);
        const auto rb = points.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end()) ||
               (std::equal(ra.begin(), ra.end(), rb.begin()) && a < b);
    });
    const std::size_t dim = points.cols();
    const double* base = points.data().data();
    auto less = [base, dim](std::size_t a, std::size_t b) {
        const double* pa = base + a * dim;
        const double* pb = base + b * dim;
        bool differs = false;
        for (std::size_t k = 0; k < dim; ++k) {
            if (pa[k] > pb[k]) return false;
            differs = differs || pa[k] != pb[k];
        }
        return differs;
    };
    return from_covers(lower_covers(ext, less));
}

PosetIndex PosetIndex::from_relation(std::size_t n, const std::function<bool(std::size_t, std::size_t)>& less) {
    // Linear extension by Kahn's algorithm on the full relation, smallest first.
    std::vector<std::uint8_t> rel(n * n, 0);
    std::vector<std::size_t> above(n, 0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (a != b && less(a, b)) {
                rel[a * n + b] = 1;
                ++above[b];
            }
        }
    }
    std::vector<std::size_t> ext;
    ext.reserve(n);
    std::vector<std::size_t> ready;
    for (std::size_t v = 0; v < n; ++v) {
        if (above[v] == 0) ready.push_back(v);
    }
    while (!ready.empty()) {
        const std::size_t a = ready.back();
        ready.pop_back();
        ext.push_back(a);
        for (std::size_t b = 0; b < n; ++b) {
            if (rel[a * n + b] && --above[b] == 0) ready.push_back(b);
        }
    }
    if (ext.size() != n) {
        throw std::invalid_argument("from_relation: relation contains a cycle");
    }
    return from_covers(lower_covers(ext, [&](std::size_t a, std::size_t b) { return rel[a * n + b] != 0; }));
}

void PosetIndex::add_root(std::size_t v) {
    root_pos_[v] = roots_.size();
    roots_.push_back(v);
}

void PosetIndex::drop_root(std::size_t v) {
    const std::size_t pos = root_pos_[v];
    const std::size_t last = roots_.back();
    roots_[pos] = last;
    root_pos_[last] = pos;
    roots_.pop_back();
    root_pos_[v] = kNotRoot;
}

std::vector<std::size_t> PosetIndex::remove_root(std::size_t v) {
    if (v >= alive_.size() || !is_root(v)) {
        throw std::logic_error("remove_root: node is not a current root");
    }
    drop_root(v);
    alive_[v] = 0;
    --live_;
    std::vector<std::size_t> promoted;
    if (grouped_) {
        const std::size_t g = group_of_[v];
        if (--group_left_[g] == 0 && g + 1 < group_left_.size()) {
            for (std::size_t pos = group_start_[g + 1]; pos < group_start_[g + 2]; ++pos) {
                promoted.push_back(order_[pos]);
            }
        }
    } else {
        for (std::size_t e = offsets_[v]; e < offsets_[v + 1]; ++e) {
            const std::size_t c = targets_[e];
            if (--in_degree_[c] == 0) promoted.push_back(c);
        }
    }
    std::sort(promoted.begin(), promoted.end());
    for (std::size_t c : promoted) add_root(c);
    return promoted;
}

std::vector<std::size_t> PosetIndex::children(std::size_t v) const {
    if (grouped_) {
        const std::size_t g = group_of_[v];
        if (g + 1 >= group_left_.size()) return {};
        std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(group_start_[g + 1]),
                                     order_.begin() + static_cast<std::ptrdiff_t>(group_start_[g + 2]));
        std::sort(out.begin(), out.end());
        return out;
    }
    return {targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
            targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1])};
}

std::size_t PosetIndex::edge_count() const {
    if (grouped_) {
        std::size_t edges = 0;
        for (std::size_t g = 0; g + 1 < group_left_.size(); ++g) {
            edges += (group_start_[g + 1] - group_start_[g]) * (group_start_[g + 2] - group_start_[g + 1]);
        }
        return edges;
    }
    return targets_.size();
}

}  // namespace jm
