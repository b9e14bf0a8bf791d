#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "shl0/fit.hpp"
#include "shl0/model.hpp"
#include "shl0/rng.hpp"
#include "shl0/screen.hpp"

namespace shl0 {

/// Penalized log-likelihood of a fitted model.  The penalty charges (n*l/2)
/// once per variable whose own coefficient or any incident interaction
/// coefficient is nonzero, plus (n*l/2) per nonzero interaction; on a
/// strong-hierarchy MLE support this is (n*l/2)*(#mains + #interactions).
template <class Scalar>
Scalar penalized_objective(const FitResult<Scalar>& fit, Scalar lambda) {
    if (lambda < Scalar(0)) throw std::domain_error("penalized_objective: lambda must be >= 0");
    int active_vars = 0;
    for (std::size_t i = 0; i < fit.alpha.mains().size(); ++i) {
        const int j = fit.alpha.mains()[i];
        bool nonzero = fit.beta_main[static_cast<Eigen::Index>(i)] != Scalar(0);
        if (!nonzero) {
            for (std::size_t q = 0; q < fit.alpha.interactions().size() && !nonzero; ++q) {
                const auto& [a, b] = fit.alpha.interactions()[q];
                nonzero = (a == j || b == j) && fit.beta_inter[static_cast<Eigen::Index>(q)] != Scalar(0);
            }
        }
        if (nonzero) ++active_vars;
    }
    int active_inters = 0;
    for (Eigen::Index q = 0; q < fit.beta_inter.size(); ++q)
        if (fit.beta_inter[q] != Scalar(0)) ++active_inters;
    return fit.loglik -
           Scalar(fit.n_obs) * lambda / Scalar(2) * Scalar(active_vars + active_inters);
}

/// One element of the active set: a main index (k == 0) or a pair (j, k).
/// Toggling an element against the current model yields the unique neighbor
/// whose difference from the model is exactly this element.
struct DiffElement {
    int j = 0;
    int k = 0;
    bool is_main() const { return k == 0; }
};

/// Mains ascending, then pairs lexicographic, over the active set.
inline std::vector<DiffElement> natural_order(const std::vector<int>& universe) {
    std::vector<DiffElement> order;
    order.reserve(universe.size() + universe.size() * (universe.size() - 1) / 2);
    for (int j : universe) order.push_back({j, 0});
    for (std::size_t a = 0; a < universe.size(); ++a)
        for (std::size_t b = a + 1; b < universe.size(); ++b)
            order.push_back({universe[a], universe[b]});
    return order;
}

template <class Scalar = double>
struct SearchState {
    ModelAlpha alpha;
    FitResult<Scalar> fit;
    Scalar objective = -std::numeric_limits<Scalar>::infinity();
    std::uint64_t rng_seed = 0;
    std::vector<std::pair<Move, Scalar>> trace;  // accepted moves and their gains
};

/// Local combinatorial search over strong-hierarchy models drawn from a
/// fixed active set.  Candidate fits are memoized by canonical model within
/// a restart; the cache is cleared between restarts.
template <class Scalar = double>
class LocalSearch {
public:
    LocalSearch(const Family<Scalar>& family, const Dataset<Scalar>& data, Scalar lambda,
                std::vector<int> universe, int max_model_size = 0,
                FitOptions<Scalar> fit_options = {})
        : fitter_(family, data),
          data_(&data),
          lambda_(lambda),
          universe_(std::move(universe)),
          cap_(max_model_size),
          fit_options_(fit_options) {
        std::sort(universe_.begin(), universe_.end());
        if (lambda_ < Scalar(0)) throw std::domain_error("search: lambda must be >= 0");
    }
    // the dataset is held by reference and must outlive the search
    LocalSearch(const Family<Scalar>&, Dataset<Scalar>&&, Scalar, std::vector<int>, int = 0,
                FitOptions<Scalar> = {}) = delete;

    const std::vector<int>& universe() const { return universe_; }
    Scalar lambda() const { return lambda_; }
    int max_model_size() const { return cap_; }

    void clear_cache() { cache_.clear(); }

    SearchState<Scalar> initial_state(const ModelAlpha& alpha = {}, std::uint64_t seed = 0) {
        const Entry& e = evaluate(alpha, nullptr);
        if (!e.ok) throw std::runtime_error("search: initial model cannot be fitted");
        SearchState<Scalar> s;
        s.alpha = alpha;
        s.fit = *e.fit;
        s.objective = e.objective;
        s.rng_seed = seed;
        return s;
    }

    /// Penalized likelihood-ratio gain of one move; -infinity when the
    /// target model cannot be fitted or exceeds the size cap.
    Scalar move_gain(const SearchState<Scalar>& state, const Move& move) {
        ModelAlpha next = apply_move(state.alpha, move);
        if (cap_ > 0 && next.size() > cap_) return -std::numeric_limits<Scalar>::infinity();
        const Entry& e = evaluate(next, &state.fit.eta);
        if (!e.ok) return -std::numeric_limits<Scalar>::infinity();
        return e.objective - state.objective;
    }

    /// First-improvement pass: examines every element of `order` once,
    /// immediately accepting any toggle with positive gain.
    SearchState<Scalar> f1ls_pass(SearchState<Scalar> state,
                                  const std::vector<DiffElement>& order) {
        for (const DiffElement& e : order) {
            std::optional<Move> move = toggle(state.alpha, e);
            if (!move) continue;
            ModelAlpha next = apply_move(state.alpha, *move);
            if (cap_ > 0 && next.size() > cap_) continue;
            const Entry& entry = evaluate(next, &state.fit.eta);
            if (!entry.ok) continue;
            const Scalar gain = entry.objective - state.objective;
            if (gain > Scalar(0)) {
                state.alpha = std::move(next);
                state.fit = *entry.fit;
                state.objective = entry.objective;
                state.trace.emplace_back(*move, gain);
            }
        }
        return state;
    }

    /// Best-improvement step: scans the whole neighborhood and applies the
    /// argmax move if its gain is positive; ties keep the earliest move in
    /// canonical neighborhood order.
    SearchState<Scalar> b1ls_step(SearchState<Scalar> state) {
        std::vector<Move> moves = neighborhood(state.alpha, universe_, cap_);
        Scalar best_gain = Scalar(0);
        std::optional<Move> best;
        for (const Move& m : moves) {
            const Scalar g = move_gain(state, m);
            if (g > best_gain) {
                best_gain = g;
                best = m;
            }
        }
        if (!best) return state;
        ModelAlpha next = apply_move(state.alpha, *best);
        const Entry& entry = evaluate(next, &state.fit.eta);
        state.alpha = std::move(next);
        state.fit = *entry.fit;
        state.objective = entry.objective;
        state.trace.emplace_back(*best, best_gain);
        return state;
    }

    /// One randomized restart: repeated first-improvement passes with a
    /// fresh random order each pass, until a full pass accepts nothing.
    SearchState<Scalar> run_restart(std::uint64_t seed, int max_passes = 50,
                                    bool* converged = nullptr) {
        SearchState<Scalar> state = initial_state(ModelAlpha{}, seed);
        std::mt19937_64 rng(seed);
        std::vector<DiffElement> order = natural_order(universe_);
        bool done = false;
        for (int pass = 0; pass < max_passes && !done; ++pass) {
            std::shuffle(order.begin(), order.end(), rng);
            const std::size_t before = state.trace.size();
            state = f1ls_pass(std::move(state), order);
            done = state.trace.size() == before;
        }
        if (converged) *converged = done;
        return state;
    }

private:
    struct Entry {
        bool ok = false;
        Scalar objective = -std::numeric_limits<Scalar>::infinity();
        std::shared_ptr<const FitResult<Scalar>> fit;
    };

    static std::optional<Move> toggle(const ModelAlpha& alpha, const DiffElement& e) {
        if (e.is_main())
            return alpha.has_main(e.j) ? Move::remove_main(e.j) : Move::add_main(e.j);
        if (alpha.has_interaction(e.j, e.k)) return Move::remove_interaction(e.j, e.k);
        return Move::add_interaction(e.j, e.k);
    }

    const Entry& evaluate(const ModelAlpha& alpha, const VecX<Scalar>* warm_eta) {
        auto [it, inserted] = cache_.try_emplace(alpha.key());
        Entry& e = it->second;
        if (!inserted) return e;
        try {
            auto fit = std::make_shared<FitResult<Scalar>>(
                fitter_.fit(alpha, fit_options_, warm_eta));
            if (fit->converged) {
                e.objective = fit->loglik -
                              Scalar(fit->n_obs) * lambda_ / Scalar(2) * Scalar(alpha.size());
                e.fit = std::move(fit);
                e.ok = true;
            }
        } catch (const SingularDesign&) {
        } catch (const DegenerateWeights&) {
        }
        return e;
    }

    ModelFitter<Scalar> fitter_;
    const Dataset<Scalar>* data_;
    Scalar lambda_;
    std::vector<int> universe_;
    int cap_;
    FitOptions<Scalar> fit_options_;
    std::unordered_map<std::string, Entry> cache_;
};

/// Free-function form of the first-improvement pass.
template <class Scalar>
SearchState<Scalar> f1ls_pass(const Family<Scalar>& family, const Dataset<Scalar>& data,
                              SearchState<Scalar> state, Scalar lambda,
                              const std::vector<DiffElement>& order,
                              const std::vector<int>& universe, int max_model_size = 0,
                              const FitOptions<Scalar>& options = {}) {
    LocalSearch<Scalar> ls(family, data, lambda, universe, max_model_size, options);
    return ls.f1ls_pass(std::move(state), order);
}

/// Free-function form of the best-improvement step.
template <class Scalar>
SearchState<Scalar> b1ls_step(const Family<Scalar>& family, const Dataset<Scalar>& data,
                              SearchState<Scalar> state, Scalar lambda,
                              const std::vector<int>& universe, int max_model_size = 0,
                              const FitOptions<Scalar>& options = {}) {
    LocalSearch<Scalar> ls(family, data, lambda, universe, max_model_size, options);
    return ls.b1ls_step(std::move(state));
}

template <class Scalar>
Scalar move_gain(const Family<Scalar>& family, const Dataset<Scalar>& data,
                 const SearchState<Scalar>& state, const Move& move, Scalar lambda,
                 const std::vector<int>& universe, int max_model_size = 0,
                 const FitOptions<Scalar>& options = {}) {
    LocalSearch<Scalar> ls(family, data, lambda, universe, max_model_size, options);
    return ls.move_gain(state, move);
}

template <class Scalar = double>
struct SelectConfig {
    int restarts = 10;
    int rounds = 2;
    Scalar gamma = Scalar(0);  // <= 0: use 1/log n
    std::uint64_t seed = 0;
    int max_model_size = 0;  // <= 0: use floor(n/2)
    ScreenMethod screen_method = ScreenMethod::Assis;
    int max_passes = 50;
    FitOptions<Scalar> fit_options{};
};

template <class Scalar = double>
struct RestartRecord {
    int round = 0;
    int index = 0;
    Scalar objective = -std::numeric_limits<Scalar>::infinity();
    bool converged = false;
    bool failed = false;
    ModelAlpha alpha;
    std::vector<std::pair<Move, Scalar>> trace;
};

template <class Scalar = double>
struct SelectionResult {
    ModelAlpha alpha_hat;
    FitResult<Scalar> fit;
    Scalar lambda = 0;
    Scalar kappa = 0;  // lambda * n
    Scalar objective = -std::numeric_limits<Scalar>::infinity();
    int rounds_run = 0;
    std::vector<RestartRecord<Scalar>> restarts;
    std::vector<std::vector<int>> screen_sets;        // active set used per round
    std::vector<ScreenResult<Scalar>> screen_results;  // full screening info per round
};

/// Two-stage selection: screen for an active set, then run randomized
/// first-improvement restarts from the empty model; a second round
/// re-screens conditionally on the first-round winner and searches again.
/// The best objective over all restarts of all rounds wins.
template <class Scalar>
SelectionResult<Scalar> select(const Family<Scalar>& family, const Dataset<Scalar>& data,
                               Scalar lambda, const SelectConfig<Scalar>& config = {}) {
    if (!(lambda > Scalar(0))) throw std::domain_error("select: lambda must be positive");
    const int n = data.n();
    const Scalar gamma =
        config.gamma > Scalar(0) ? config.gamma : Scalar(1) / std::log(Scalar(n));
    const int cap = config.max_model_size > 0 ? config.max_model_size : n / 2;

    SelectionResult<Scalar> out;
    out.lambda = lambda;
    out.kappa = lambda * Scalar(n);

    ModelAlpha base;
    const FitResult<Scalar>* base_fit = nullptr;
    std::optional<SearchState<Scalar>> best;

    for (int round = 1; round <= config.rounds; ++round) {
        ScreenResult<Scalar> sr = screen(family, data, base, gamma, config.screen_method,
                                         config.fit_options, base_fit);
        out.screen_sets.push_back(sr.shrunk);
        LocalSearch<Scalar> ls(family, data, lambda, sr.shrunk, cap, config.fit_options);
        for (int r = 0; r < config.restarts; ++r) {
            ls.clear_cache();  // bounds memory; restarts stay independent
            RestartRecord<Scalar> rec;
            rec.round = round;
            rec.index = r;
            try {
                bool conv = false;
                SearchState<Scalar> s =
                    ls.run_restart(derive_seed(config.seed, std::uint64_t(round), std::uint64_t(r)),
                                   config.max_passes, &conv);
                rec.objective = s.objective;
                rec.converged = conv;
                rec.alpha = s.alpha;
                rec.trace = s.trace;
                if (!best || s.objective > best->objective) best = std::move(s);
            } catch (const std::exception&) {
                rec.failed = true;
            }
            out.restarts.push_back(std::move(rec));
        }
        out.screen_results.push_back(std::move(sr));
        out.rounds_run = round;
        if (best) {
            base = best->alpha;
            base_fit = &best->fit;
        }
    }

    if (best) {
        out.alpha_hat = best->alpha;
        out.fit = best->fit;
        out.objective = best->objective;
    } else {
        // Every restart failed; the empty model with its intercept-only fit
        // is still a valid answer.
        out.alpha_hat = ModelAlpha{};
        out.fit = fit_mle(family, data, out.alpha_hat, config.fit_options);
        out.objective = out.fit.loglik;
    }
    return out;
}

}  // namespace shl0
