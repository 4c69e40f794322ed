#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "jm/matrix.hpp"

namespace jm {

/// Strict partial orders on masked p-value vectors. Smaller favours the alternative.
enum class PartialOrder : std::uint8_t {
    MaxNorm,  ///< a < b iff max_k a_k < max_k b_k
    Product,  ///< a < b iff a_k <= b_k for all k and a != b
    Empty,    ///< no pair is comparable
};

/// Throws std::invalid_argument when the dimensions differ.
bool less_than(PartialOrder order, std::span<const double> a, std::span<const double> b);

/// Transitively reduced DAG over a fixed node set with Kahn-style root tracking.
///
/// Node ids are positions 0..n-1 in the input. An edge (b, a) means a < b with no
/// intermediate element, so the roots (in-degree zero) are the maximal elements
/// of the surviving nodes. Nodes leave only through remove_root().
class PosetIndex {
public:
    /// Reduction of the given order over the rows of `points`.
    /// MaxNorm is realised as norm-sorted groups instead of an explicit DAG; roots and
    /// promotions are identical to those of the reduced DAG (complete bipartite links
    /// between consecutive norm groups).
    static PosetIndex build(const Matrix& points, PartialOrder order);

    /// Reduction of an arbitrary strict partial order given as a predicate
    /// less(a, b) on node ids. The predicate must be irreflexive and transitive.
    static PosetIndex from_relation(std::size_t n, const std::function<bool(std::size_t, std::size_t)>& less);

    std::size_t node_count() const noexcept { return alive_.size(); }
    std::size_t live_count() const noexcept { return live_; }
    bool alive(std::size_t v) const noexcept { return alive_[v] != 0; }

    /// Current maximal set. Order is unspecified.
    std::span<const std::size_t> roots() const noexcept { return roots_; }
    bool is_root(std::size_t v) const noexcept { return root_pos_[v] != kNotRoot; }

    /// Removes root v and returns the nodes promoted to roots, in ascending id order.
    /// Throws std::logic_error if v is not a current root.
    std::vector<std::size_t> remove_root(std::size_t v);

    /// Lower covers of v in the reduction (targets of edges leaving v).
    std::vector<std::size_t> children(std::size_t v) const;
    std::size_t edge_count() const;

private:
    static constexpr std::size_t kNotRoot = static_cast<std::size_t>(-1);

    static PosetIndex from_covers(std::vector<std::vector<std::size_t>> covers);
    static PosetIndex from_norm_groups(const Matrix& points);
    void add_root(std::size_t v);
    void drop_root(std::size_t v);

    bool grouped_ = false;
    // DAG representation (compressed adjacency).
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> targets_;
    std::vector<std::size_t> in_degree_;
    // Grouped representation: nodes sorted by descending norm, group boundaries.
    std::vector<std::size_t> order_;
    std::vector<std::size_t> group_start_;
    std::vector<std::size_t> group_of_;
    std::vector<std::size_t> group_left_;

    std::vector<std::uint8_t> alive_;
    std::size_t live_ = 0;
    std::vector<std::size_t> roots_;
    std::vector<std::size_t> root_pos_;
};

}  // namespace jm
