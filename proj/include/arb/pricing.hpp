#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "arb/error.hpp"
#include "arb/types.hpp"

namespace arb {

/**
 * Price one metered attempt in currency units:
 *
 *   [(input - cached) * input_price
 *    + cached * input_price * (1 - cache_discount)
 *    + output * output_price] / 1e6
 * evaluated in the equivalent grouping
 *   [input * input_price - cached * input_price * cache_discount
 *    + output * output_price] / 1e6
 * which keeps round-number price tables (0.25 in, 90% discount) on exact
 * decimal results.
 *
 * Cached input tokens are billed at the discounted input rate.
 */
inline double price_attempt(std::int64_t input_tokens,
                            std::int64_t output_tokens,
                            std::int64_t cached_input_tokens,
                            const PricingEntry& pricing) {
    pricing.validate();
    if (input_tokens < 0 || output_tokens < 0 || cached_input_tokens < 0)
        throw Error(Errc::invalid_record, "negative token count");
    if (cached_input_tokens > input_tokens)
        throw Error(Errc::invalid_record, "cached_input_tokens exceeds input_tokens");
    const double input = static_cast<double>(input_tokens);
    const double cached = static_cast<double>(cached_input_tokens);
    const double out = static_cast<double>(output_tokens);
    return (input * pricing.input_price
            - cached * pricing.input_price * pricing.cache_discount
            + out * pricing.output_price) / 1e6;
}

/// Inference FLOPs of a forward pass stream: 2 * params * generated tokens.
inline double flop_cost(double model_params, double generated_tokens) {
    if (!(model_params > 0.0)) throw Error(Errc::bad_config, "model_params must be > 0");
    if (generated_tokens < 0.0) throw Error(Errc::bad_config, "generated_tokens must be >= 0");
    return 2.0 * model_params * generated_tokens;
}

/** Per-provider pricing rows, loadable from a CSV table. */
class PricingTable {
public:
    PricingTable() = default;
    explicit PricingTable(std::vector<PricingEntry> entries) {
        for (auto& e : entries) {
            e.validate();
            if (!rows_.emplace(e.provider_id, e).second)
                throw Error(Errc::invalid_record, "duplicate pricing for " + e.provider_id);
        }
    }

    const PricingEntry& require(const std::string& provider_id) const {
        auto it = rows_.find(provider_id);
        if (it == rows_.end())
            throw Error(Errc::not_found, "no pricing entry for provider '" + provider_id + "'");
        return it->second;
    }

    const PricingEntry* find(const std::string& provider_id) const {
        auto it = rows_.find(provider_id);
        return it == rows_.end() ? nullptr : &it->second;
    }

    std::size_t size() const { return rows_.size(); }

    // CSV columns: provider_id,input_price,output_price,cache_discount
    static PricingTable load_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error(Errc::io_error, "cannot open pricing table '" + path + "'");
        std::vector<PricingEntry> entries;
        std::string line;
        std::size_t lineno = 0;
        bool header_seen = false;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            const auto fields = split_csv(line);
            if (!header_seen) {
                header_seen = true;
                if (fields.size() < 4 || fields[0] != "provider_id")
                    throw Error(Errc::parse_error,
                                path + ":" + std::to_string(lineno) +
                                ": expected header provider_id,input_price,output_price,cache_discount");
                continue;
            }
            if (fields.size() < 4)
                throw Error(Errc::parse_error,
                            path + ":" + std::to_string(lineno) + ": expected 4 columns");
            PricingEntry e;
            e.provider_id = fields[0];
            e.input_price = parse_number(fields[1], path, lineno);
            e.output_price = parse_number(fields[2], path, lineno);
            e.cache_discount = parse_number(fields[3], path, lineno);
            entries.push_back(std::move(e));
        }
        if (entries.empty())
            throw Error(Errc::empty_input, "pricing table '" + path + "' has no rows");
        return PricingTable(std::move(entries));
    }

private:
    static std::vector<std::string> split_csv(const std::string& line) {
        std::vector<std::string> out;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            // trim surrounding whitespace
            const auto b = field.find_first_not_of(" \t\r");
            const auto e = field.find_last_not_of(" \t\r");
            out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
        }
        return out;
    }

    static double parse_number(const std::string& s, const std::string& path, std::size_t lineno) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw Error(Errc::parse_error,
                        path + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
        }
    }

    std::map<std::string, PricingEntry> rows_;
};

} // namespace arb
