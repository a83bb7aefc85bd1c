#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "arb/error.hpp"
#include "arb/passk.hpp"

namespace arb {

// Spec-pinned defaults shared across the toolkit.
inline constexpr double kDefaultBudgetMax   = 1.0;     // per-issue budget ceiling
inline constexpr double kDefaultBudgetStep  = 0.001;   // budget grid resolution
inline constexpr double kDefaultCapStep     = 0.01;    // cap search resolution
inline constexpr double kDefaultPerfStep    = 0.0025;  // performance grid resolution
inline constexpr double kDefaultUndercut    = 0.01;    // price undercut fraction
inline constexpr int    kDefaultResamples   = 1000;    // bootstrap replicates

enum class CostUnit { usd, flops, abstract_unit };

inline const char* to_string(CostUnit u) {
    switch (u) {
        case CostUnit::usd: return "usd";
        case CostUnit::flops: return "flops";
        case CostUnit::abstract_unit: return "abstract";
    }
    return "abstract";
}

inline CostUnit cost_unit_from_string(std::string_view s) {
    if (s == "usd" || s == "USD") return CostUnit::usd;
    if (s == "flops" || s == "FLOPs" || s == "FLOPS") return CostUnit::flops;
    if (s == "abstract") return CostUnit::abstract_unit;
    throw Error(Errc::parse_error, "unknown cost unit '" + std::string(s) + "'");
}

/** One observed attempt of one provider on one problem. */
struct AttemptRecord {
    std::string provider_id;
    std::string problem_id;
    bool success = false;
    std::optional<double> cost;                 // in the run's cost unit
    std::optional<std::int64_t> input_tokens;
    std::optional<std::int64_t> output_tokens;
    std::optional<std::int64_t> cached_input_tokens;
    std::set<std::string> tags;
    std::optional<CostUnit> declared_unit;      // self-describing logs may pin it

    bool has_tokens() const { return input_tokens && output_tokens; }

    void validate() const {
        if (provider_id.empty() || problem_id.empty())
            throw Error(Errc::invalid_record, "record missing provider_id or problem_id");
        if (!cost && !has_tokens())
            throw Error(Errc::invalid_record,
                        "record needs either a cost or token counts (" + provider_id + "/" + problem_id + ")");
        if (cost && *cost < 0.0)
            throw Error(Errc::invalid_record, "negative cost");
        if (input_tokens && *input_tokens < 0) throw Error(Errc::invalid_record, "negative input_tokens");
        if (output_tokens && *output_tokens < 0) throw Error(Errc::invalid_record, "negative output_tokens");
        if (cached_input_tokens) {
            if (*cached_input_tokens < 0) throw Error(Errc::invalid_record, "negative cached_input_tokens");
            if (input_tokens && *cached_input_tokens > *input_tokens)
                throw Error(Errc::invalid_record, "cached_input_tokens exceeds input_tokens");
        }
    }
};

/** Per-million-token prices for one provider, plus its cached-input discount. */
struct PricingEntry {
    std::string provider_id;
    double input_price = 0.0;    // per 1e6 input tokens
    double output_price = 0.0;   // per 1e6 output tokens
    double cache_discount = 0.0; // fraction in [0, 1]

    void validate() const {
        if (provider_id.empty()) throw Error(Errc::invalid_record, "pricing entry without provider_id");
        if (input_price < 0.0 || output_price < 0.0)
            throw Error(Errc::invalid_record, "negative token price for " + provider_id);
        if (cache_discount < 0.0 || cache_discount > 1.0)
            throw Error(Errc::invalid_record, "cache_discount outside [0,1] for " + provider_id);
    }
};

/** Aggregated (n, m, s_hat) triple for one provider x problem pair. */
struct ProblemStats {
    std::string provider_id;
    std::string problem_id;
    int attempts = 0;        // n >= 1 for observed pairs, 0 for imputed ones
    int successes = 0;       // m
    double mean_cost = 0.0;  // s_hat, > 0
    std::set<std::string> tags;

    void validate() const {
        if (provider_id.empty() || problem_id.empty())
            throw Error(Errc::invalid_record, "stats missing provider_id or problem_id");
        if (attempts < 1)
            throw Error(Errc::invalid_record,
                        "stats need at least one attempt (" + provider_id + "/" + problem_id + ")");
        if (successes < 0 || successes > attempts)
            throw Error(Errc::invalid_record, "success count outside [0, attempts]");
        if (!(mean_cost > 0.0))
            throw Error(Errc::degenerate_cost,
                        "mean attempt cost must be > 0 (" + provider_id + "/" + problem_id + ")");
    }
};

/// One retained attempt (cost, outcome) in recorded order.
struct Attempt {
    double cost = 0.0;
    bool success = false;
};

/**
 * Immutable collection of ProblemStats over a provider set and a problem set,
 * in one cost unit. Missing (provider, problem) pairs are modelled as never
 * solved, with the provider's mean attempt cost imputed from its observed
 * problems.
 */
class Dataset {
public:
    Dataset() = default;

    static Dataset from_stats(std::vector<ProblemStats> stats, CostUnit unit) {
        if (stats.empty()) throw Error(Errc::empty_input, "no stats to build a dataset from");
        Dataset d;
        d.unit_ = unit;
        for (auto& s : stats) {
            s.validate();
            d.insert_ids(s.provider_id, s.problem_id);
        }
        d.finish_ids();
        for (auto& s : stats) {
            const std::size_t cell = d.cell_index(*d.provider_index(s.provider_id),
                                                  *d.problem_index(s.problem_id));
            if (d.cells_[cell].attempts > 0)
                throw Error(Errc::invalid_record,
                            "duplicate stats for " + s.provider_id + "/" + s.problem_id);
            d.cells_[cell] = Cell{s.attempts, s.successes, s.mean_cost, {}};
            auto& tagset = d.problem_tags_[*d.problem_index(s.problem_id)];
            tagset.insert(s.tags.begin(), s.tags.end());
        }
        d.compute_imputations();
        return d;
    }

    bool empty() const { return problems_.empty(); }
    CostUnit unit() const { return unit_; }

    const std::vector<std::string>& providers() const { return providers_; }
    const std::vector<std::string>& problems() const { return problems_; }
    std::size_t provider_count() const { return providers_.size(); }
    std::size_t problem_count() const { return problems_.size(); }

    std::optional<std::size_t> provider_index(std::string_view id) const {
        return index_of(providers_, id);
    }
    std::optional<std::size_t> problem_index(std::string_view id) const {
        return index_of(problems_, id);
    }

    std::size_t require_provider(std::string_view id) const {
        auto i = provider_index(id);
        if (!i) throw Error(Errc::not_found, "unknown provider '" + std::string(id) + "'");
        return *i;
    }
    std::size_t require_problem(std::string_view id) const {
        auto i = problem_index(id);
        if (!i) throw Error(Errc::not_found, "unknown problem '" + std::string(id) + "'");
        return *i;
    }

    bool observed(std::size_t provider, std::size_t problem) const {
        return cells_[cell_index(provider, problem)].attempts > 0;
    }

    /// Stats for the pair; attempts == 0 with an imputed mean cost when unobserved.
    ProblemStats stats_at(std::size_t provider, std::size_t problem) const {
        const Cell& c = cells_[cell_index(provider, problem)];
        ProblemStats s;
        s.provider_id = providers_[provider];
        s.problem_id = problems_[problem];
        s.tags = problem_tags_[problem];
        if (c.attempts > 0) {
            s.attempts = c.attempts;
            s.successes = c.successes;
            s.mean_cost = c.mean_cost;
        } else {
            s.attempts = 0;
            s.successes = 0;
            s.mean_cost = imputed_mean_cost_[provider];
        }
        return s;
    }

    const std::vector<Attempt>* attempt_log(std::size_t provider, std::size_t problem) const {
        const Cell& c = cells_[cell_index(provider, problem)];
        return c.attempt_log.empty() ? nullptr : &c.attempt_log;
    }

    double imputed_mean_cost(std::size_t provider) const { return imputed_mean_cost_[provider]; }

    const std::set<std::string>& problem_tags(std::size_t problem) const {
        return problem_tags_[problem];
    }

    SolveCurve solve_curve(std::size_t provider, std::size_t problem) const {
        const Cell& c = cells_[cell_index(provider, problem)];
        SolveCurve curve;
        if (c.attempts > 0) {
            curve.mean_cost = c.mean_cost;
            curve.passk = pass_at_k_table(c.attempts, c.successes);
        } else {
            curve.mean_cost = imputed_mean_cost_[provider];
            curve.passk = {0.0};
        }
        return curve;
    }

    /// Per-problem solve curves of one provider, aligned with problems().
    std::vector<SolveCurve> provider_curves(std::size_t provider) const {
        std::vector<SolveCurve> out;
        out.reserve(problems_.size());
        for (std::size_t j = 0; j < problems_.size(); ++j) out.push_back(solve_curve(provider, j));
        return out;
    }

    /// All observed stats rows, sorted by (provider, problem).
    std::vector<ProblemStats> all_stats() const {
        std::vector<ProblemStats> out;
        for (std::size_t p = 0; p < providers_.size(); ++p)
            for (std::size_t j = 0; j < problems_.size(); ++j)
                if (observed(p, j)) out.push_back(stats_at(p, j));
        return out;
    }

    /// Restriction to a subset of problems; keeps the full provider set.
    Dataset subset(const std::vector<std::string>& problem_ids) const {
        Dataset d;
        d.unit_ = unit_;
        d.providers_ = providers_;
        std::vector<std::string> sorted_ids = problem_ids;
        std::sort(sorted_ids.begin(), sorted_ids.end());
        sorted_ids.erase(std::unique(sorted_ids.begin(), sorted_ids.end()), sorted_ids.end());
        for (const auto& id : sorted_ids) require_problem(id);
        d.problems_ = std::move(sorted_ids);
        d.cells_.assign(d.providers_.size() * d.problems_.size(), Cell{});
        d.problem_tags_.resize(d.problems_.size());
        for (std::size_t j = 0; j < d.problems_.size(); ++j) {
            const std::size_t src_j = require_problem(d.problems_[j]);
            d.problem_tags_[j] = problem_tags_[src_j];
            for (std::size_t p = 0; p < d.providers_.size(); ++p)
                d.cells_[d.cell_index(p, j)] = cells_[cell_index(p, src_j)];
        }
        d.compute_imputations();
        return d;
    }

    /// Replaces the retained attempt log of one observed pair (ingest use).
    void set_attempt_log(std::size_t provider, std::size_t problem, std::vector<Attempt> log) {
        cells_[cell_index(provider, problem)].attempt_log = std::move(log);
    }

private:
    struct Cell {
        int attempts = 0;
        int successes = 0;
        double mean_cost = 0.0;
        std::vector<Attempt> attempt_log; // recorded order; may be empty
    };

    friend Dataset aggregate(const std::vector<AttemptRecord>&, CostUnit);

    static std::optional<std::size_t> index_of(const std::vector<std::string>& v, std::string_view id) {
        auto it = std::lower_bound(v.begin(), v.end(), id);
        if (it == v.end() || *it != id) return std::nullopt;
        return static_cast<std::size_t>(it - v.begin());
    }

    std::size_t cell_index(std::size_t provider, std::size_t problem) const {
        return provider * problems_.size() + problem;
    }

    void insert_ids(const std::string& provider, const std::string& problem) {
        providers_.push_back(provider);
        problems_.push_back(problem);
    }

    void finish_ids() {
        auto dedupe = [](std::vector<std::string>& v) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        };
        dedupe(providers_);
        dedupe(problems_);
        cells_.assign(providers_.size() * problems_.size(), Cell{});
        problem_tags_.assign(problems_.size(), {});
    }

    void compute_imputations() {
        imputed_mean_cost_.assign(providers_.size(), 0.0);
        double global_sum = 0.0;
        std::size_t global_n = 0;
        for (std::size_t p = 0; p < providers_.size(); ++p)
            for (std::size_t j = 0; j < problems_.size(); ++j) {
                const Cell& c = cells_[cell_index(p, j)];
                if (c.attempts > 0) {
                    global_sum += c.mean_cost;
                    ++global_n;
                }
            }
        const double global_mean = global_n > 0 ? global_sum / static_cast<double>(global_n) : 1.0;
        for (std::size_t p = 0; p < providers_.size(); ++p) {
            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t j = 0; j < problems_.size(); ++j) {
                const Cell& c = cells_[cell_index(p, j)];
                if (c.attempts > 0) {
                    sum += c.mean_cost;
                    ++n;
                }
            }
            // Provider with no observed problems at all: fall back to the dataset mean.
            imputed_mean_cost_[p] = n > 0 ? sum / static_cast<double>(n) : global_mean;
        }
    }

    CostUnit unit_ = CostUnit::abstract_unit;
    std::vector<std::string> providers_;   // sorted
    std::vector<std::string> problems_;    // sorted
    std::vector<Cell> cells_;              // provider-major
    std::vector<std::set<std::string>> problem_tags_;
    std::vector<double> imputed_mean_cost_;
};

} // namespace arb
