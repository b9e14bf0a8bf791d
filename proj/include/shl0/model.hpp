#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "shl0/errors.hpp"

namespace shl0 {

using IndexPair = std::pair<int, int>;

/// A candidate model: a set of main-effect indices and a set of interaction
/// pairs (j, k) with j < k.  Kept in canonical order (mains ascending, pairs
/// lexicographic) so equality and hashing are well defined.
class ModelAlpha {
public:
    ModelAlpha() = default;
    ModelAlpha(std::vector<int> mains, std::vector<IndexPair> interactions)
        : mains_(std::move(mains)), interactions_(std::move(interactions)) {
        canonicalize();
    }

    const std::vector<int>& mains() const { return mains_; }
    const std::vector<IndexPair>& interactions() const { return interactions_; }

    int size() const { return static_cast<int>(mains_.size() + interactions_.size()); }
    bool empty() const { return mains_.empty() && interactions_.empty(); }

    bool has_main(int j) const {
        return std::binary_search(mains_.begin(), mains_.end(), j);
    }
    bool has_interaction(int j, int k) const {
        return std::binary_search(interactions_.begin(), interactions_.end(), ordered(j, k));
    }

    void add_main(int j) {
        if (has_main(j)) return;
        mains_.insert(std::upper_bound(mains_.begin(), mains_.end(), j), j);
    }
    void remove_main(int j) {
        auto it = std::lower_bound(mains_.begin(), mains_.end(), j);
        if (it != mains_.end() && *it == j) mains_.erase(it);
    }
    void add_interaction(int j, int k) {
        IndexPair q = ordered(j, k);
        if (has_interaction(q.first, q.second)) return;
        interactions_.insert(std::upper_bound(interactions_.begin(), interactions_.end(), q), q);
    }
    void remove_interaction(int j, int k) {
        IndexPair q = ordered(j, k);
        auto it = std::lower_bound(interactions_.begin(), interactions_.end(), q);
        if (it != interactions_.end() && *it == q) interactions_.erase(it);
    }

    /// True iff alpha is a (non-strict) subset of other.
    bool subset_of(const ModelAlpha& other) const {
        return std::includes(other.mains_.begin(), other.mains_.end(), mains_.begin(),
                             mains_.end()) &&
               std::includes(other.interactions_.begin(), other.interactions_.end(),
                             interactions_.begin(), interactions_.end());
    }

    bool operator==(const ModelAlpha& other) const {
        return mains_ == other.mains_ && interactions_ == other.interactions_;
    }
    bool operator!=(const ModelAlpha& other) const { return !(*this == other); }

    /// Compact canonical encoding, usable as a hash-map key.
    std::string key() const {
        std::string s;
        s.reserve(4 * (mains_.size() + 2 * interactions_.size()) + 1);
        auto push = [&s](int v) {
            for (int b = 0; b < 4; ++b) s.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
        };
        push(static_cast<int>(mains_.size()));
        for (int j : mains_) push(j);
        for (const auto& [j, k] : interactions_) {
            push(j);
            push(k);
        }
        return s;
    }

    static IndexPair ordered(int j, int k) { return j < k ? IndexPair{j, k} : IndexPair{k, j}; }

private:
    void canonicalize() {
        std::sort(mains_.begin(), mains_.end());
        mains_.erase(std::unique(mains_.begin(), mains_.end()), mains_.end());
        for (auto& q : interactions_) q = ordered(q.first, q.second);
        std::sort(interactions_.begin(), interactions_.end());
        interactions_.erase(std::unique(interactions_.begin(), interactions_.end()),
                            interactions_.end());
    }

    std::vector<int> mains_;
    std::vector<IndexPair> interactions_;
};

/// True iff every interaction pair has both endpoints among the mains.
inline bool check_strong_hierarchy(const ModelAlpha& alpha) {
    for (const auto& [j, k] : alpha.interactions())
        if (!alpha.has_main(j) || !alpha.has_main(k)) return false;
    return true;
}

enum class MoveKind { AddMain, RemoveMain, AddInteraction, RemoveInteraction };

/// One search move.  k is unused for main-effect moves.
struct Move {
    MoveKind kind;
    int j = 0;
    int k = 0;

    static Move add_main(int j) { return {MoveKind::AddMain, j, 0}; }
    static Move remove_main(int j) { return {MoveKind::RemoveMain, j, 0}; }
    static Move add_interaction(int j, int k) {
        auto [a, b] = ModelAlpha::ordered(j, k);
        return {MoveKind::AddInteraction, a, b};
    }
    static Move remove_interaction(int j, int k) {
        auto [a, b] = ModelAlpha::ordered(j, k);
        return {MoveKind::RemoveInteraction, a, b};
    }

    bool operator==(const Move& o) const { return kind == o.kind && j == o.j && k == o.k; }

    std::string describe() const {
        switch (kind) {
            case MoveKind::AddMain: return "+x" + std::to_string(j);
            case MoveKind::RemoveMain: return "-x" + std::to_string(j);
            case MoveKind::AddInteraction:
                return "+x" + std::to_string(j) + "*x" + std::to_string(k);
            case MoveKind::RemoveInteraction:
                return "-x" + std::to_string(j) + "*x" + std::to_string(k);
        }
        return "?";
    }
};

/// Applies one of the four move scenarios, preserving strong hierarchy:
///   RemoveInteraction drops only the pair;
///   RemoveMain(j) drops j and every interaction touching j;
///   AddMain(j) adds only j;
///   AddInteraction(j,k) adds (j,k) plus whichever of j, k are missing.
inline ModelAlpha apply_move(const ModelAlpha& alpha, const Move& move) {
    ModelAlpha out = alpha;
    switch (move.kind) {
        case MoveKind::AddMain:
            if (alpha.has_main(move.j)) throw InvalidMove("add_main: already present");
            out.add_main(move.j);
            break;
        case MoveKind::RemoveMain: {
            if (!alpha.has_main(move.j)) throw InvalidMove("remove_main: not present");
            out.remove_main(move.j);
            std::vector<IndexPair> kept;
            kept.reserve(out.interactions().size());
            for (const auto& q : out.interactions())
                if (q.first != move.j && q.second != move.j) kept.push_back(q);
            out = ModelAlpha(out.mains(), std::move(kept));
            break;
        }
        case MoveKind::AddInteraction:
            if (alpha.has_interaction(move.j, move.k))
                throw InvalidMove("add_interaction: already present");
            out.add_interaction(move.j, move.k);
            out.add_main(move.j);
            out.add_main(move.k);
            break;
        case MoveKind::RemoveInteraction:
            if (!alpha.has_interaction(move.j, move.k))
                throw InvalidMove("remove_interaction: not present");
            out.remove_interaction(move.j, move.k);
            break;
    }
    return out;
}

/// All moves whose result lies in the search neighborhood of alpha over the
/// active set `universe` (sorted main indices).  A positive `max_model_size`
/// excludes moves whose result would exceed that cap.
inline std::vector<Move> neighborhood(const ModelAlpha& alpha, const std::vector<int>& universe,
                                      int max_model_size = 0) {
    std::vector<Move> moves;
    const int cap = max_model_size > 0 ? max_model_size : std::numeric_limits<int>::max();
    for (int j : universe)
        if (!alpha.has_main(j) && alpha.size() + 1 <= cap) moves.push_back(Move::add_main(j));
    for (std::size_t a = 0; a < universe.size(); ++a) {
        for (std::size_t b = a + 1; b < universe.size(); ++b) {
            const int j = universe[a], k = universe[b];
            if (alpha.has_interaction(j, k)) continue;
            const int grow = 1 + (alpha.has_main(j) ? 0 : 1) + (alpha.has_main(k) ? 0 : 1);
            if (alpha.size() + grow <= cap) moves.push_back(Move::add_interaction(j, k));
        }
    }
    for (const auto& [j, k] : alpha.interactions()) moves.push_back(Move::remove_interaction(j, k));
    for (int j : alpha.mains()) moves.push_back(Move::remove_main(j));
    return moves;
}

}  // namespace shl0
