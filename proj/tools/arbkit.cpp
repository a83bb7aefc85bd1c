// arbkit: attempt logs in, plot-ready arbitrage analyses out.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <arb/arbkit.hpp>

namespace fs = std::filesystem;
using namespace arb;

namespace {

struct Options {
    std::string logs;
    std::string pricing;
    std::string out;
    std::string policy_file;
    std::string cost_unit = "abstract";
    std::string split_tag;
    double b_max = kDefaultBudgetMax;
    double grid_step = kDefaultBudgetStep;
    double cap_step = kDefaultCapStep;
    double u_min = 0.0;
    double u_max = 1.0;
    double undercut = kDefaultUndercut;
    double search_budget = 0.0;
    double per_query_cap = 0.0;
    std::uint64_t seed = 0;
    std::int64_t trials = 100000;
    int resamples = kDefaultResamples;
    int rounds = 500;
};

void add_input_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--logs", opt.logs, "attempt log (JSONL) or a saved dataset file")->required();
    cmd->add_option("--pricing", opt.pricing, "per-provider token pricing CSV");
    cmd->add_option("--out", opt.out, "output directory (default: $ARBKIT_OUT or .)");
    cmd->add_option("--cost-unit", opt.cost_unit, "cost unit of the logs: usd, flops, abstract")
        ->check(CLI::IsMember({"usd", "flops", "abstract"}));
}

void add_grid_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--b-max", opt.b_max, "largest per-issue budget on the grid");
    cmd->add_option("--grid-step", opt.grid_step, "budget grid step");
}

void add_range_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--u-min", opt.u_min, "lowest performance level aggregated");
    cmd->add_option("--u-max", opt.u_max, "highest performance level aggregated");
}

fs::path resolve_out_dir(const Options& opt) {
    std::string dir = opt.out;
    if (dir.empty())
        if (const char* env = std::getenv("ARBKIT_OUT")) dir = env;
    if (dir.empty()) dir = ".";
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec && !fs::is_directory(p))
        throw Error(Errc::io_error, "cannot create output directory '" + dir + "'");
    return p;
}

bool looks_like_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) return line.find("\"schema\":\"arbkit-dataset-v1\"") != std::string::npos;
    return false;
}

Dataset load_input(const Options& opt) {
    if (looks_like_dataset(opt.logs)) return load_dataset(opt.logs);
    auto records = load_attempt_log(opt.logs);
    bool needs_pricing = false;
    for (const auto& r : records) needs_pricing |= !r.cost.has_value();
    if (needs_pricing || !opt.pricing.empty()) {
        const PricingTable table =
            opt.pricing.empty() ? PricingTable{} : PricingTable::load_csv(opt.pricing);
        if (needs_pricing && opt.pricing.empty())
            throw Error(Errc::bad_config, "token-only records need --pricing");
        records = price_records(std::move(records), &table);
    }
    // token pricing is USD by definition; a uniform declared unit wins over the flag
    std::optional<CostUnit> declared;
    bool uniform = true;
    for (const auto& r : records)
        if (r.declared_unit) {
            if (declared && *declared != *r.declared_unit) uniform = false;
            declared = r.declared_unit;
        }
    CostUnit unit = needs_pricing ? CostUnit::usd : cost_unit_from_string(opt.cost_unit);
    if (declared && uniform && !needs_pricing) unit = *declared;
    return aggregate(records, unit);
}

std::string safe_name(const std::string& id) {
    std::string out;
    for (char c : id)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
    return out.empty() ? std::string("_") : out;
}

void stamp(TableWriter& t, const Dataset& d, const Options& opt) {
    t.set_comment("cost_unit", to_string(d.unit()));
    t.set_comment("b_max", opt.b_max);
    t.set_comment("grid_step", opt.grid_step);
    t.set_comment("perf_step", kDefaultPerfStep);
}

std::vector<PriceFrontier> provider_frontiers(const Dataset& d, const BudgetGrid& grid,
                                              const std::vector<double>& pgrid) {
    std::vector<PriceFrontier> out;
    for (const auto& id : d.providers())
        out.push_back(frontier_from_curve(build_provider_curve(d, id, grid), pgrid));
    return out;
}

OptimizerConfig optimizer_config(const Options& opt, bool with_progress) {
    OptimizerConfig cfg;
    cfg.b_max = opt.b_max;
    cfg.budget_step = opt.grid_step;
    cfg.cap_step = opt.cap_step;
    cfg.u_min = opt.u_min;
    cfg.u_max = opt.u_max;
    if (with_progress) {
        cfg.progress = [](std::size_t done, std::size_t total, double best) {
            const std::size_t tick = std::max<std::size_t>(total / 10, 1);
            if (done % tick == 0 || done == total)
                std::cerr << "arbkit: searched " << done << "/" << total
                          << " cap vectors, best profit " << format_double(best) << "\n";
        };
    }
    return cfg;
}

CascadePolicy obtain_policy(const Dataset& d, const Options& opt) {
    if (!opt.policy_file.empty()) return load_policy(opt.policy_file);
    return optimize_policy(d, optimizer_config(opt, true)).policy;
}

std::string caps_summary(const CascadePolicy& policy) {
    std::string out;
    for (const auto& e : policy.entries) {
        if (!out.empty()) out += ",";
        out += e.provider_id + ":" + format_double(e.cap);
    }
    return out;
}

// ---------------------------------------------------------------- subcommands

void run_ingest(const Options& opt) {
    const fs::path dir = resolve_out_dir(opt);
    const Dataset d = load_input(opt);
    Manifest manifest("ingest");

    const fs::path dataset_path = dir / "dataset.jsonl";
    save_dataset(d, dataset_path.string());
    manifest.add("dataset.jsonl", "aggregated per-(provider, problem) statistics");

    TableWriter summary({"provider", "problems_observed", "attempts", "successes",
                         "mean_attempt_cost"});
    summary.set_comment("cost_unit", to_string(d.unit()));
    summary.set_comment("problems", static_cast<double>(d.problem_count()));
    for (std::size_t p = 0; p < d.provider_count(); ++p) {
        long attempts = 0;
        long successes = 0;
        double cost = 0.0;
        long observed = 0;
        for (std::size_t j = 0; j < d.problem_count(); ++j) {
            if (!d.observed(p, j)) continue;
            const auto st = d.stats_at(p, j);
            ++observed;
            attempts += st.attempts;
            successes += st.successes;
            cost += st.mean_cost * st.attempts;
        }
        summary.add_row({d.providers()[p], std::to_string(observed), std::to_string(attempts),
                         std::to_string(successes),
                         format_double(attempts > 0 ? cost / static_cast<double>(attempts) : 0.0)});
    }
    summary.save((dir / "ingest_summary.tsv").string());
    manifest.add("ingest_summary.tsv", "per-provider aggregate counts");

    if (!opt.split_tag.empty()) {
        const auto split = split_by_tag(d, opt.split_tag);
        const std::string tag = safe_name(opt.split_tag);
        if (!split.with_tag.empty()) {
            const std::string name = "dataset_with_" + tag + ".jsonl";
            save_dataset(split.with_tag, (dir / name).string());
            manifest.add(name, "problems tagged '" + opt.split_tag + "'");
        }
        if (!split.without_tag.empty()) {
            const std::string name = "dataset_without_" + tag + ".jsonl";
            save_dataset(split.without_tag, (dir / name).string());
            manifest.add(name, "problems lacking '" + opt.split_tag + "'");
        }
    }
    manifest.save((dir / "ingest_manifest.json").string());
}

void run_frontier(const Options& opt) {
    const fs::path dir = resolve_out_dir(opt);
    const Dataset d = load_input(opt);
    const BudgetGrid grid{opt.b_max, opt.grid_step};
    const auto pgrid = performance_grid();
    Manifest manifest("frontier");

    std::vector<PriceFrontier> frontiers;
    for (const auto& id : d.providers()) {
        const auto curve = build_provider_curve(d, id, grid);
        TableWriter t({"budget", "performance", "expected_cost"});
        stamp(t, d, opt);
        t.set_comment("provider", id);
        for (std::size_t i = 0; i < curve.budgets.size(); ++i)
            t.add_row({format_double(curve.budgets[i]), format_double(curve.performance[i]),
                       format_double(curve.expected_cost[i])});
        const std::string name = "curve_" + safe_name(id) + ".tsv";
        t.save((dir / name).string());
        manifest.add(name, "budget/performance/cost curve for " + id);
        frontiers.push_back(frontier_from_curve(curve, pgrid));
    }

    const MarketFrontier market = market_frontier(frontiers);
    std::vector<std::string> columns{"u"};
    for (const auto& id : d.providers()) columns.push_back("cost_" + safe_name(id));
    columns.push_back("market_cost");
    columns.push_back("market_provider");
    TableWriter t(columns);
    stamp(t, d, opt);
    for (std::size_t i = 0; i < pgrid.size(); ++i) {
        std::vector<std::string> row{format_double(pgrid[i])};
        for (const auto& f : frontiers) row.push_back(format_cell(f.cost[i]));
        row.push_back(format_cell(market.cost[i]));
        row.push_back(market.provider[i]);
        t.add_row(std::move(row));
    }
    t.save((dir / "frontier.tsv").string());
    manifest.add("frontier.tsv", "per-provider price frontiers and the market minimum");
    manifest.save((dir / "frontier_manifest.json").string());
}

void run_optimize(const Options& opt) {
    const fs::path dir = resolve_out_dir(opt);
    const Dataset d = load_input(opt);
    const BudgetGrid grid{opt.b_max, opt.grid_step};
    const auto pgrid = performance_grid();
    Manifest manifest("optimize");

    const auto best = optimize_policy(d, optimizer_config(opt, true));
    save_policy(best.policy, (dir / "policy.json").string());
    manifest.add("policy.json", "profit-maximizing cascade caps");

    const MarketFrontier market = market_frontier(provider_frontiers(d, grid, pgrid));
    const PriceFrontier mine = cascade_frontier(best.policy, d, grid, pgrid);
    const ProfitCurve curve = profit_curve(market, mine);

    TableWriter t({"u", "market_cost", "market_provider", "policy_cost", "profit", "margin",
                   "markup", "reference"});
    stamp(t, d, opt);
    t.set_comment("cap_step", opt.cap_step);
    t.set_comment("u_min", opt.u_min);
    t.set_comment("u_max", opt.u_max);
    t.set_comment("caps", caps_summary(best.policy));
    t.set_comment("aggregate_profit", best.profit);
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const auto& pt = curve.points[i];
        t.add_row({format_double(pt.u), format_cell(pt.market_cost), market.provider[i],
                   format_cell(pt.policy_cost), format_double(pt.profit),
                   format_double(pt.margin), format_double(pt.markup),
                   pt.unbounded_reference ? "policy-only" : "market"});
    }
    t.save((dir / "profit.tsv").string());
    manifest.add("profit.tsv", "marginal profit against the market at each performance level");
    manifest.save((dir / "optimize_manifest.json").string());
}

void run_compete(const Options& opt) {
    const fs::path dir = resolve_out_dir(opt);
    const Dataset d = load_input(opt);
    const BudgetGrid grid{opt.b_max, opt.grid_step};
    const auto pgrid = performance_grid();
    Manifest manifest("compete");

    const CascadePolicy policy = obtain_policy(d, opt);
    save_policy(policy, (dir / "compete_policy.json").string());
    manifest.add("compete_policy.json", "cascade policy competing against the market");

    const MarketFrontier market = market_frontier(provider_frontiers(d, grid, pgrid));
    const PriceFrontier buy = cascade_frontier(policy, d, grid, pgrid);
    auto state = make_market_state(market, {{"arb1", buy}, {"arb2", buy}});
    const auto trajectory = bertrand_simulate(state, opt.rounds, opt.undercut);

    TableWriter traj({"round", "u", "prevailing", "ask_arb1", "ask_arb2"});
    stamp(traj, d, opt);
    traj.set_comment("undercut", opt.undercut);
    traj.set_comment("rounds_run", static_cast<double>(trajectory.size() - 1));
    for (const auto& snap : trajectory)
        for (std::size_t i = 0; i < pgrid.size(); ++i)
            traj.add_row({std::to_string(snap.round), format_double(pgrid[i]),
                          format_cell(snap.prevailing[i]), format_cell(snap.asks[0].cost[i]),
                          format_cell(snap.asks[1].cost[i])});
    traj.save((dir / "trajectory.tsv").string());
    manifest.add("trajectory.tsv", "asks and prevailing price per competition round");

    TableWriter eq({"u", "market_cost", "policy_cost", "reference_price", "final_prevailing"});
    stamp(eq, d, opt);
    eq.set_comment("undercut", opt.undercut);
    eq.set_comment("caps", caps_summary(policy));
    const auto& final_prevailing = trajectory.back().prevailing;
    for (std::size_t i = 0; i < pgrid.size(); ++i) {
        std::optional<double> reference;
        if (market.cost[i] && buy.cost[i])
            reference = std::min(*market.cost[i], *buy.cost[i]);
        else if (market.cost[i])
            reference = market.cost[i];
        else if (buy.cost[i])
            reference = buy.cost[i];
        eq.add_row({format_double(pgrid[i]), format_cell(market.cost[i]),
                    format_cell(buy.cost[i]), format_cell(reference),
                    format_cell(final_prevailing[i])});
    }
    eq.save((dir / "equilibrium.tsv").string());
    manifest.add("equilibrium.tsv", "final prices against the competitive reference");
    manifest.save((dir / "compete_manifest.json").string());
}

void run_revenue(const Options& opt) {
    const fs::path dir = resolve_out_dir(opt);
    const Dataset d = load_input(opt);
    const BudgetGrid grid{opt.b_max, opt.grid_step};
    const auto pgrid = performance_grid();
    Manifest manifest("revenue");

    const CascadePolicy policy = obtain_policy(d, opt);
    save_policy(policy, (dir / "revenue_policy.json").string());
    manifest.add("revenue_policy.json", "cascade policy whose payouts are tracked");

    const auto frontiers = provider_frontiers(d, grid, pgrid);
    const auto report =
        marginal_revenue_change(d, frontiers, policy, grid, opt.u_min, opt.u_max);

    std::vector<std::string> columns{"u", "feasible", "expenditure", "before_provider",
                                     "arbitrage_active"};
    for (const auto& id : report.policy_providers) columns.push_back("share_" + safe_name(id));
    columns.push_back("arbitrage_profit");
    TableWriter t(columns);
    stamp(t, d, opt);
    t.set_comment("caps", caps_summary(policy));
    for (const auto& pt : report.points) {
        std::vector<std::string> row{format_double(pt.u), pt.feasible ? "1" : "0",
                                     format_cell(pt.expenditure), pt.before_provider,
                                     pt.arbitrage_active ? "1" : "0"};
        for (std::size_t e = 0; e < report.policy_providers.size(); ++e) {
            if (pt.arbitrage_active)
                row.push_back(format_double(pt.after_share[e]));
            else if (pt.feasible && pt.before_provider == report.policy_providers[e])
                row.push_back(format_cell(pt.expenditure));
            else
                row.push_back("0");
        }
        row.push_back(format_double(pt.arbitrage_profit));
        t.add_row(std::move(row));
    }
    t.save((dir / "revenue.tsv").string());
    manifest.add("revenue.tsv", "expenditure routing per performance level");

    TableWriter s({"provider", "before", "after", "delta"});
    stamp(s, d, opt);
    s.set_comment("profit_total", report.profit_total);
    std::string marks;
    for (double u : report.boundaries_before) {
        if (!marks.empty()) marks += ",";
        marks += format_double(u);
    }
    s.set_comment("boundaries_before", marks.empty() ? "none" : marks);
    marks.clear();
    for (double u : report.boundaries_after) {
        if (!marks.empty()) marks += ",";
        marks += format_double(u);
    }
    s.set_comment("boundaries_after", marks.empty() ? "none" : marks);
    for (const auto& kv : report.delta) {
        const auto before =
            report.before_total.count(kv.first) ? report.before_total.at(kv.first) : 0.0;
        const auto after =
            report.after_total.count(kv.first) ? report.after_total.at(kv.first) : 0.0;
        s.add_row({kv.first, format_double(before), format_double(after),
                   format_double(kv.second)});
    }
    s.save((dir / "revenue_summary.tsv").string());
    manifest.add("revenue_summary.tsv", "revenue totals per provider before and after arbitrage");
    manifest.save((dir / "revenue_manifest.json").string());
}

void run_robustness(const Options& opt) {
    const fs::path dir = resolve_out_dir(opt);
    const Dataset d = load_input(opt);
    if (!(opt.search_budget > 0.0)) throw Error(Errc::bad_config, "--search-budget must be > 0");
    if (!(opt.per_query_cap > 0.0)) throw Error(Errc::bad_config, "--per-query-cap must be > 0");
    Manifest manifest("robustness");
    const auto cfg = optimizer_config(opt, false);

    TableWriter sweep({"search_budget", "comparisons", "margin_mean", "ci_lo", "ci_hi"});
    stamp(sweep, d, opt);
    sweep.set_comment("per_query_cap", opt.per_query_cap);
    sweep.set_comment("resamples", static_cast<double>(opt.resamples));
    sweep.set_comment("seed", static_cast<double>(opt.seed));
    BootstrapResult full;
    for (const double frac : {0.125, 0.25, 0.5, 1.0}) {
        const double budget = opt.search_budget * frac;
        if (budget < opt.per_query_cap) continue;
        const auto ci = bootstrap_profit_ci(d, budget, opt.per_query_cap, opt.resamples,
                                            opt.seed, cfg, opt.u_min, opt.u_max);
        const auto comparisons = std::floor(budget / opt.per_query_cap + 1e-9);
        sweep.add_row({format_double(budget), format_double(comparisons),
                       format_double(ci.mean), format_double(ci.lo), format_double(ci.hi)});
        if (frac == 1.0) full = ci;
    }
    sweep.save((dir / "sweep.tsv").string());
    manifest.add("sweep.tsv", "margin confidence intervals per search budget");

    TableWriter boot({"replicate", "margin"});
    stamp(boot, d, opt);
    boot.set_comment("search_budget", opt.search_budget);
    boot.set_comment("per_query_cap", opt.per_query_cap);
    boot.set_comment("seed", static_cast<double>(opt.seed));
    for (std::size_t r = 0; r < full.margins.size(); ++r)
        boot.add_row({std::to_string(r), format_double(full.margins[r])});
    boot.save((dir / "bootstrap.tsv").string());
    manifest.add("bootstrap.tsv", "per-replicate evaluation margins at the full search budget");
    manifest.save((dir / "robustness_manifest.json").string());
}

void run_ood(const Options& opt) {
    const fs::path dir = resolve_out_dir(opt);
    const Dataset d = load_input(opt);
    if (opt.split_tag.empty()) throw Error(Errc::bad_config, "--split-tag is required for ood");
    const auto split = split_by_tag(d, opt.split_tag);
    if (split.empty_side)
        throw Error(Errc::empty_input,
                    "tag '" + opt.split_tag + "' does not split the problems in two");
    Manifest manifest("ood");
    const auto cfg = optimizer_config(opt, false);
    const std::string tag = safe_name(opt.split_tag);

    TableWriter t({"train_split", "eval_split", "train_problems", "eval_problems", "fit_profit",
                   "eval_margin", "policy_file"});
    stamp(t, d, opt);
    t.set_comment("split_tag", opt.split_tag);

    struct Direction {
        const Dataset* train;
        const Dataset* eval;
        std::string train_name;
        std::string eval_name;
        std::string policy_name;
    };
    const std::vector<Direction> directions{
        {&split.with_tag, &split.without_tag, "with_" + tag, "without_" + tag,
         "ood_policy_with_" + tag + ".json"},
        {&split.without_tag, &split.with_tag, "without_" + tag, "with_" + tag,
         "ood_policy_without_" + tag + ".json"},
    };
    for (const auto& dir_spec : directions) {
        const auto fit =
            ood_evaluate(*dir_spec.train, *dir_spec.eval, cfg, opt.u_min, opt.u_max);
        save_policy(fit.policy, (dir / dir_spec.policy_name).string());
        manifest.add(dir_spec.policy_name, "caps fitted on the " + dir_spec.train_name + " split");
        t.add_row({dir_spec.train_name, dir_spec.eval_name,
                   std::to_string(dir_spec.train->problem_count()),
                   std::to_string(dir_spec.eval->problem_count()),
                   format_double(fit.fit_profit), format_double(fit.eval_margin),
                   dir_spec.policy_name});
    }
    t.save((dir / "ood.tsv").string());
    manifest.add("ood.tsv", "cross-split fit and evaluation results");
    manifest.save((dir / "ood_manifest.json").string());
}

void run_simulate(const Options& opt) {
    const fs::path dir = resolve_out_dir(opt);
    const Dataset d = load_input(opt);
    Manifest manifest("simulate");
    SimConfig sim;
    sim.trials = opt.trials;
    sim.mode = SpendMode::continuous;

    std::vector<double> budgets;
    for (int i = 1; i <= 10; ++i) budgets.push_back(opt.b_max * i / 10.0);

    TableWriter t({"provider", "budget", "analytic_performance", "simulated_performance",
                   "analytic_cost", "simulated_cost"});
    stamp(t, d, opt);
    t.set_comment("trials", static_cast<double>(opt.trials));
    t.set_comment("seed", static_cast<double>(opt.seed));
    for (const auto& id : d.providers()) {
        const std::size_t p = d.require_provider(id);
        for (double b : budgets) {
            double sim_perf = 0.0;
            double sim_cost = 0.0;
            for (std::size_t j = 0; j < d.problem_count(); ++j) {
                sim.seed = Rng::substream_seed(opt.seed, p * d.problem_count() + j);
                const auto r = simulate_provider(d.stats_at(p, j), b, sim);
                sim_perf += r.solve_rate;
                sim_cost += r.mean_spend;
            }
            sim_perf /= static_cast<double>(d.problem_count());
            t.add_row({id, format_double(b), format_double(provider_performance(d, id, b)),
                       format_double(sim_perf),
                       format_double(provider_expected_cost(d, id, b, opt.grid_step)),
                       format_double(sim_cost)});
        }
    }
    t.save((dir / "simulate.tsv").string());
    manifest.add("simulate.tsv", "analytic curves against the Monte Carlo oracle");

    if (!opt.policy_file.empty()) {
        const CascadePolicy policy = load_policy(opt.policy_file);
        std::vector<std::string> columns{"budget", "analytic_performance",
                                         "simulated_performance", "analytic_cost",
                                         "simulated_cost"};
        for (const auto& e : policy.entries)
            columns.push_back("spend_" + safe_name(e.provider_id));
        TableWriter c(columns);
        stamp(c, d, opt);
        c.set_comment("trials", static_cast<double>(opt.trials));
        c.set_comment("seed", static_cast<double>(opt.seed));
        c.set_comment("caps", caps_summary(policy));
        for (double b : budgets) {
            sim.seed = opt.seed;
            const auto r = simulate_cascade(policy, d, b, sim);
            std::vector<std::string> row{
                format_double(b), format_double(cascade_performance(policy, d, b)),
                format_double(r.performance),
                format_double(cascade_expected_cost(policy, d, b, opt.grid_step)),
                format_double(r.mean_total_spend)};
            for (double s : r.provider_spend) row.push_back(format_double(s));
            c.add_row(std::move(row));
        }
        c.save((dir / "simulate_cascade.tsv").string());
        manifest.add("simulate_cascade.tsv", "cascade analytics against the Monte Carlo oracle");
    }
    manifest.save((dir / "simulate_manifest.json").string());
}

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case Errc::bad_config:
            return 1;
        case Errc::invalid_record:
        case Errc::degenerate_cost:
        case Errc::mixed_units:
        case Errc::not_found:
        case Errc::out_of_support:
        case Errc::empty_input:
        case Errc::overlapping_split:
        case Errc::parse_error:
        case Errc::io_error:
            return 2;
    }
    return 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"arbitrage analysis over AI model market attempt logs"};
    app.require_subcommand(1);
    Options opt;

    auto* ingest = app.add_subcommand("ingest", "aggregate attempt logs into a dataset file");
    add_input_flags(ingest, opt);
    ingest->add_option("--split-tag", opt.split_tag, "also write per-tag dataset splits");

    auto* frontier = app.add_subcommand("frontier", "provider cost/performance frontiers");
    add_input_flags(frontier, opt);
    add_grid_flags(frontier, opt);

    auto* optimize = app.add_subcommand("optimize", "search cascade caps for maximal profit");
    add_input_flags(optimize, opt);
    add_grid_flags(optimize, opt);
    add_range_flags(optimize, opt);
    optimize->add_option("--cap-step", opt.cap_step, "cap grid step of the search");

    auto* compete = app.add_subcommand("compete", "price competition between arbitrageurs");
    add_input_flags(compete, opt);
    add_grid_flags(compete, opt);
    add_range_flags(compete, opt);
    compete->add_option("--cap-step", opt.cap_step, "cap grid step when fitting the policy");
    compete->add_option("--undercut", opt.undercut, "fractional undercut per pricing turn");
    compete->add_option("--rounds", opt.rounds, "maximum pricing rounds");
    compete->add_option("--policy", opt.policy_file, "cascade policy file (skips the cap search)");

    auto* revenue = app.add_subcommand("revenue", "revenue attribution before and after arbitrage");
    add_input_flags(revenue, opt);
    add_grid_flags(revenue, opt);
    add_range_flags(revenue, opt);
    revenue->add_option("--cap-step", opt.cap_step, "cap grid step when fitting the policy");
    revenue->add_option("--policy", opt.policy_file, "cascade policy file (skips the cap search)");

    auto* robustness = app.add_subcommand("robustness", "search-budget sweep with bootstrap CIs");
    add_input_flags(robustness, opt);
    add_grid_flags(robustness, opt);
    add_range_flags(robustness, opt);
    robustness->add_option("--cap-step", opt.cap_step, "cap grid step of the fits");
    robustness->add_option("--search-budget", opt.search_budget, "spend on price comparisons")
        ->required();
    robustness->add_option("--per-query-cap", opt.per_query_cap, "spend cap per probed problem")
        ->required();
    robustness->add_option("--resamples", opt.resamples, "bootstrap replicates");
    robustness->add_option("--seed", opt.seed, "master random seed");

    auto* ood = app.add_subcommand("ood", "fit on one tag split, evaluate on the other");
    add_input_flags(ood, opt);
    add_grid_flags(ood, opt);
    add_range_flags(ood, opt);
    ood->add_option("--cap-step", opt.cap_step, "cap grid step of the fits");
    ood->add_option("--split-tag", opt.split_tag, "tag defining the two problem splits")
        ->required();

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo oracle versus the analytics");
    add_input_flags(simulate, opt);
    add_grid_flags(simulate, opt);
    simulate->add_option("--trials", opt.trials, "Monte Carlo trials per budget");
    simulate->add_option("--seed", opt.seed, "master random seed");
    simulate->add_option("--policy", opt.policy_file, "also simulate this cascade policy");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (ingest->parsed()) run_ingest(opt);
        else if (frontier->parsed()) run_frontier(opt);
        else if (optimize->parsed()) run_optimize(opt);
        else if (compete->parsed()) run_compete(opt);
        else if (revenue->parsed()) run_revenue(opt);
        else if (robustness->parsed()) run_robustness(opt);
        else if (ood->parsed()) run_ood(opt);
        else if (simulate->parsed()) run_simulate(opt);
    } catch (const Error& e) {
        std::cerr << "arbkit: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "arbkit: internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
