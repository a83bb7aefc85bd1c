#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "arb/error.hpp"
#include "arb/pricing.hpp"
#include "arb/types.hpp"

namespace arb {

/// Parses one JSON attempt-log line. Throws parse_error / invalid_record.
inline AttemptRecord parse_attempt_line(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, std::string("bad JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(Errc::parse_error, "record is not a JSON object");
    AttemptRecord r;
    try {
        r.provider_id = j.at("provider_id").get<std::string>();
        r.problem_id = j.at("problem_id").get<std::string>();
        r.success = j.at("success").get<bool>();
        if (j.contains("cost")) r.cost = j.at("cost").get<double>();
        if (j.contains("input_tokens")) r.input_tokens = j.at("input_tokens").get<std::int64_t>();
        if (j.contains("output_tokens")) r.output_tokens = j.at("output_tokens").get<std::int64_t>();
        if (j.contains("cached_input_tokens"))
            r.cached_input_tokens = j.at("cached_input_tokens").get<std::int64_t>();
        if (j.contains("tags"))
            for (const auto& t : j.at("tags")) r.tags.insert(t.get<std::string>());
        if (j.contains("cost_unit"))
            r.declared_unit = cost_unit_from_string(j.at("cost_unit").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, std::string("bad field: ") + e.what());
    }
    r.validate();
    return r;
}

/// Loads a line-delimited attempt log; diagnostics carry the line number.
inline std::vector<AttemptRecord> load_attempt_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open attempt log '" + path + "'");
    std::vector<AttemptRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            records.push_back(parse_attempt_line(line));
        } catch (const Error& e) {
            throw Error(e.code(), path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (records.empty()) throw Error(Errc::empty_input, "attempt log '" + path + "' has no records");
    return records;
}

/**
 * Fills in record costs. Records that already carry a cost are kept as-is;
 * token-only records are priced from the table (USD) or, when `params`
 * maps providers to parameter counts, as 2 * params * output_tokens (FLOPs).
 */
inline std::vector<AttemptRecord> price_records(std::vector<AttemptRecord> records,
                                                const PricingTable* pricing,
                                                const std::map<std::string, double>* params = nullptr) {
    for (auto& r : records) {
        if (r.cost) continue;
        if (!r.has_tokens())
            throw Error(Errc::invalid_record,
                        "record without cost or tokens (" + r.provider_id + "/" + r.problem_id + ")");
        if (params) {
            auto it = params->find(r.provider_id);
            if (it == params->end())
                throw Error(Errc::not_found, "no parameter count for provider '" + r.provider_id + "'");
            r.cost = flop_cost(it->second, static_cast<double>(*r.output_tokens));
        } else if (pricing) {
            r.cost = price_attempt(*r.input_tokens, *r.output_tokens,
                                   r.cached_input_tokens.value_or(0), pricing->require(r.provider_id));
        } else {
            throw Error(Errc::bad_config,
                        "token-only records need a pricing table or parameter counts");
        }
    }
    return records;
}

/**
 * Folds priced attempt records into per-(provider, problem) statistics.
 * Retains each pair's attempt sequence in recorded order for later
 * budget-capped subsampling. The resulting stats are order-invariant.
 */
inline Dataset aggregate(const std::vector<AttemptRecord>& records, CostUnit unit) {
    if (records.empty()) throw Error(Errc::empty_input, "no records to aggregate");
    for (const auto& r : records) {
        r.validate();
        if (!r.cost)
            throw Error(Errc::invalid_record,
                        "unpriced record (" + r.provider_id + "/" + r.problem_id +
                        "); run pricing first");
        if (r.declared_unit && *r.declared_unit != unit)
            throw Error(Errc::mixed_units,
                        "record declares unit '" + std::string(to_string(*r.declared_unit)) +
                        "' but the dataset is in '" + std::string(to_string(unit)) + "'");
    }

    Dataset d;
    d.unit_ = unit;
    for (const auto& r : records) d.insert_ids(r.provider_id, r.problem_id);
    d.finish_ids();

    struct Group {
        int attempts = 0;
        int successes = 0;
        double total_cost = 0.0;
        std::vector<Attempt> log;
    };
    std::map<std::pair<std::size_t, std::size_t>, Group> groups;
    for (const auto& r : records) {
        const std::size_t p = *d.provider_index(r.provider_id);
        const std::size_t j = *d.problem_index(r.problem_id);
        Group& g = groups[{p, j}];
        ++g.attempts;
        if (r.success) ++g.successes;
        g.total_cost += *r.cost;
        g.log.push_back(Attempt{*r.cost, r.success});
        d.problem_tags_[j].insert(r.tags.begin(), r.tags.end());
    }
    for (auto& [key, g] : groups) {
        const double mean = g.total_cost / static_cast<double>(g.attempts);
        if (!(mean > 0.0))
            throw Error(Errc::degenerate_cost,
                        "all attempts cost 0 for " + d.providers_[key.first] + "/" +
                        d.problems_[key.second]);
        d.cells_[d.cell_index(key.first, key.second)] =
            Dataset::Cell{g.attempts, g.successes, mean, std::move(g.log)};
    }
    d.compute_imputations();
    return d;
}

/** Partition of a dataset's problems by tag membership. */
struct TagSplit {
    Dataset with_tag;     // may be empty when the tag matches nothing
    Dataset without_tag;  // may be empty when the tag matches everything
    bool empty_side = false;
};

inline TagSplit split_by_tag(const Dataset& dataset, const std::string& tag) {
    if (dataset.empty()) throw Error(Errc::empty_input, "cannot split an empty dataset");
    std::vector<std::string> with, without;
    for (std::size_t j = 0; j < dataset.problem_count(); ++j) {
        const auto& tags = dataset.problem_tags(j);
        (tags.count(tag) ? with : without).push_back(dataset.problems()[j]);
    }
    TagSplit out;
    if (!with.empty()) out.with_tag = dataset.subset(with);
    if (!without.empty()) out.without_tag = dataset.subset(without);
    out.empty_side = with.empty() || without.empty();
    return out;
}

/// Dataset file: one JSON object per line; first line holds the cost unit.
inline void save_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write dataset '" + path + "'");
    nlohmann::json meta{{"schema", "arbkit-dataset-v1"}, {"cost_unit", to_string(dataset.unit())}};
    out << meta.dump() << '\n';
    for (std::size_t p = 0; p < dataset.provider_count(); ++p)
        for (std::size_t j = 0; j < dataset.problem_count(); ++j) {
            if (!dataset.observed(p, j)) continue;
            const ProblemStats s = dataset.stats_at(p, j);
            nlohmann::json row{{"provider_id", s.provider_id},
                               {"problem_id", s.problem_id},
                               {"attempts", s.attempts},
                               {"successes", s.successes},
                               {"mean_attempt_cost", s.mean_cost}};
            if (!s.tags.empty()) row["tags"] = s.tags;
            if (const auto* log = dataset.attempt_log(p, j)) {
                nlohmann::json jl = nlohmann::json::array();
                for (const auto& a : *log) jl.push_back({a.cost, a.success});
                row["attempt_log"] = std::move(jl);
            }
            out << row.dump() << '\n';
        }
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open dataset '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    CostUnit unit = CostUnit::abstract_unit;
    std::vector<ProblemStats> stats;
    std::vector<std::vector<Attempt>> logs;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::parse_error,
                        path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
        }
        try {
            if (lineno == 1 && j.contains("schema")) {
                unit = cost_unit_from_string(j.at("cost_unit").get<std::string>());
                continue;
            }
            ProblemStats s;
            s.provider_id = j.at("provider_id").get<std::string>();
            s.problem_id = j.at("problem_id").get<std::string>();
            s.attempts = j.at("attempts").get<int>();
            s.successes = j.at("successes").get<int>();
            s.mean_cost = j.at("mean_attempt_cost").get<double>();
            if (j.contains("tags"))
                for (const auto& t : j.at("tags")) s.tags.insert(t.get<std::string>());
            std::vector<Attempt> log;
            if (j.contains("attempt_log"))
                for (const auto& a : j.at("attempt_log"))
                    log.push_back(Attempt{a.at(0).get<double>(), a.at(1).get<bool>()});
            stats.push_back(std::move(s));
            logs.push_back(std::move(log));
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::parse_error,
                        path + ":" + std::to_string(lineno) + ": bad field: " + e.what());
        }
    }
    if (stats.empty()) throw Error(Errc::empty_input, "dataset '" + path + "' has no rows");
    Dataset d = Dataset::from_stats(stats, unit);
    for (std::size_t i = 0; i < stats.size(); ++i) {
        if (logs[i].empty()) continue;
        d.set_attempt_log(d.require_provider(stats[i].provider_id),
                          d.require_problem(stats[i].problem_id), std::move(logs[i]));
    }
    return d;
}

} // namespace arb
