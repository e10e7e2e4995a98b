#include "lineage/app.hpp"

#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "lineage/analytics.hpp"
#include "lineage/disruption.hpp"
#include "lineage/graph.hpp"
#include "lineage/ingest.hpp"
#include "lineage/structure.hpp"
#include "lineage/synth.hpp"

namespace lineage::app {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything that determines a run's outputs. Echoed into each output directory.
struct RunConfig {
    std::string subcommand;
    fs::path out_dir;

    // ingest
    std::string source;
    fs::path dump_path;
    std::string strictness = "strict";
    std::string endpoint;
    std::size_t page_size = 1000;
    std::optional<std::size_t> max_records;
    double rate_limit = 5.0;
    int retries = 3;
    bool resume = false;

    // build / mdi / analyze
    fs::path snapshot_path;
    fs::path graph_dir;
    std::vector<int> windows;
    int main_window = disruption::kMainWindowDays;
    double epsilon = disruption::kDefaultEpsilon;
    bool include_ineligible = false;
    std::vector<std::string> period_boundaries{"2023-03-01", "2024-04-01", "2025-04-01"};
    double lowess_frac = 0.3;
    int lowess_iters = 2;
    bool log_x = false;

    // synth
    std::size_t nodes = 1000;
    std::uint64_t seed = 1;
    std::string attachment = "preferential";
    double attractiveness = 1.0;

    // Not echoed: results never depend on it.
    unsigned workers = 1;

    json to_json() const {
        json j{{"subcommand", subcommand}, {"out", out_dir.string()}};
        if (subcommand == "ingest") {
            j["source"] = source;
            if (source == "dump") {
                j["dump_path"] = dump_path.string();
                j["strictness"] = strictness;
            } else {
                j["endpoint"] = endpoint;
                j["page_size"] = page_size;
                j["max_records"] = max_records ? json(*max_records) : json(nullptr);
                j["rate_limit"] = rate_limit;
                j["retries"] = retries;
                j["resume"] = resume;
            }
        } else if (subcommand == "build") {
            j["snapshot"] = snapshot_path.string();
        } else if (subcommand == "mdi" || subcommand == "analyze") {
            j["snapshot"] = snapshot_path.empty() ? json(nullptr) : json(snapshot_path.string());
            j["graph"] = graph_dir.empty() ? json(nullptr) : json(graph_dir.string());
            j["windows"] = windows;
            j["epsilon"] = epsilon;
            if (subcommand == "mdi") {
                j["include_ineligible"] = include_ineligible;
            } else {
                j["main_window"] = main_window;
                j["period_boundaries"] = period_boundaries;
                j["lowess_frac"] = lowess_frac;
                j["lowess_iters"] = lowess_iters;
                j["log_x"] = log_x;
            }
        } else if (subcommand == "synth") {
            j["nodes"] = nodes;
            j["seed"] = seed;
            j["attachment"] = attachment;
            j["attractiveness"] = attractiveness;
        }
        return j;
    }
};

void write_json(const fs::path& path, const json& value) {
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out) {
        throw DataError{fmt::format("cannot write '{}'", path.string())};
    }
    out << value.dump(2) << '\n';
}

void prepare_out_dir(const RunConfig& config) {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec || !fs::is_directory(config.out_dir)) {
        throw UsageError{fmt::format("--out: cannot create directory '{}'", config.out_dir.string())};
    }
}

void echo_config(const RunConfig& config) {
    write_json(config.out_dir / "run_config.json", config.to_json());
}

struct LoadedGraph {
    graph::LineageGraph graph;
    std::optional<graph::CleaningReport> cleaning;
};

LoadedGraph load_graph(const RunConfig& config) {
    if (!config.graph_dir.empty()) {
        return {graph::read_graph(config.graph_dir / "nodes.tsv", config.graph_dir / "edges.tsv"), std::nullopt};
    }
    auto snapshot = ingest::read_dump(config.snapshot_path, ingest::Strictness::strict);
    auto built = graph::build_graph(snapshot);
    return {std::move(built.graph), built.report};
}

void validate_graph_input(const RunConfig& config) {
    if (config.graph_dir.empty() == config.snapshot_path.empty()) {
        throw UsageError{"exactly one of --graph or --snapshot is required"};
    }
    if (!config.graph_dir.empty()) {
        for (const char* name : {"nodes.tsv", "edges.tsv"}) {
            if (!fs::is_regular_file(config.graph_dir / name)) {
                throw UsageError{fmt::format("--graph: '{}' has no {}", config.graph_dir.string(), name)};
            }
        }
    }
}

std::vector<Timestamp> parse_boundaries(const std::vector<std::string>& texts) {
    std::vector<Timestamp> out;
    for (const auto& text : texts) {
        const auto ts = parse_date(text);
        if (!ts) {
            throw UsageError{fmt::format("--period-boundaries: '{}' is not a YYYY-MM-DD date", text)};
        }
        out.push_back(*ts);
    }
    if (!std::is_sorted(out.begin(), out.end()) ||
        std::adjacent_find(out.begin(), out.end()) != out.end()) {
        throw UsageError{"--period-boundaries: dates must be strictly ascending"};
    }
    return out;
}

// ---------------------------------------------------------------------------

void cmd_ingest(const RunConfig& config) {
    ingest::Snapshot snapshot;
    if (config.source == "dump") {
        const auto strictness =
            config.strictness == "lenient" ? ingest::Strictness::lenient : ingest::Strictness::strict;
        snapshot = ingest::read_dump(config.dump_path, strictness);
    } else {
        ingest::FetchOptions options;
        options.endpoint_url = config.endpoint;
        options.page_size = config.page_size;
        options.rate_limit = config.rate_limit;
        options.max_records = config.max_records;
        options.max_retries = config.retries;
        options.checkpoint_dir = config.out_dir / "checkpoint";
        if (!config.resume) {
            fs::remove_all(*options.checkpoint_dir);
        }
        snapshot = ingest::fetch_live(options);
    }
    ingest::write_snapshot(snapshot, config.out_dir / "snapshot.jsonl");

    const auto& s = snapshot.stats;
    write_json(config.out_dir / "ingest_stats.json",
               {{"source", ingest::to_string(snapshot.source)},
                {"records", snapshot.records.size()},
                {"rows_read", s.rows_read},
                {"duplicates", s.duplicates},
                {"skipped", s.skipped},
                {"skipped_by_reason", s.skipped_by_reason},
                {"before_platform_floor", s.before_platform_floor},
                {"pages_fetched", s.pages_fetched},
                {"malformed_pages", s.malformed_pages}});
    spdlog::info("ingest: {} records -> {}", snapshot.records.size(), (config.out_dir / "snapshot.jsonl").string());
}

void cmd_build(const RunConfig& config) {
    const auto snapshot = ingest::read_dump(config.snapshot_path, ingest::Strictness::strict);
    const auto built = graph::build_graph(snapshot);
    graph::write_edge_list(built.graph, config.out_dir / "edges.tsv");
    graph::write_node_table(built.graph, config.out_dir / "nodes.tsv");
    write_json(config.out_dir / "cleaning_report.json", built.report.to_json());
    write_json(config.out_dir / "census.json", graph::census(built.graph).to_json());
    spdlog::info("build: {} nodes, {} edges", built.graph.node_count(), built.graph.edge_count());
}

disruption::SweepOptions sweep_options(const RunConfig& config, std::vector<int> windows) {
    disruption::SweepOptions options;
    options.windows = std::move(windows);
    options.epsilon = config.epsilon;
    options.workers = config.workers;
    options.include_ineligible = config.include_ineligible;
    return options;
}

void cmd_mdi(const RunConfig& config) {
    const auto loaded = load_graph(config);
    const auto table = disruption::mdi_sweep(loaded.graph, sweep_options(config, config.windows));
    disruption::write_mdi_csv(table, config.out_dir / "mdi.csv");
    spdlog::info("mdi: {} rows", table.size());
}

json power_law_json(const structure::DegreeDistribution& dist) {
    try {
        return structure::fit_power_law(dist).to_json();
    } catch (const structure::InsufficientTail& e) {
        return {{"error", e.what()}};
    }
}

void cmd_analyze(const RunConfig& config) {
    const auto boundaries = parse_boundaries(config.period_boundaries);
    const auto loaded = load_graph(config);
    const auto& g = loaded.graph;
    const fs::path& out = config.out_dir;

    std::vector<int> windows = config.windows;
    if (std::find(windows.begin(), windows.end(), config.main_window) == windows.end()) {
        windows.push_back(config.main_window);
    }

    json bundle;
    bundle["config"] = config.to_json();
    const auto census = graph::census(g);
    bundle["census"] = census.to_json();
    write_json(out / "census.json", census.to_json());
    if (loaded.cleaning) {
        bundle["cleaning"] = loaded.cleaning->to_json();
    }

    // Structure.
    json degrees = json::object();
    json fits = json::object();
    for (const auto scope : structure::kAllScopes) {
        const auto dist = structure::in_degrees(g, scope);
        structure::write_degree_csv(dist, out / fmt::format("degree_{}.csv", structure::to_string(scope)));
        json rows = json::array();
        for (const auto& [degree, count] : dist.histogram) {
            rows.push_back({degree, count});
        }
        degrees[structure::to_string(scope)] = rows;
        fits[structure::to_string(scope)] = power_law_json(dist);
    }
    write_json(out / "powerlaw.json", fits);
    const auto wcc = structure::weakly_connected_components(g);
    structure::write_wcc_csv(wcc, out / "wcc.csv");
    json wcc_json = wcc.to_json();
    wcc_json["sizes"] = wcc.component_sizes;
    bundle["structure"] = {{"degree_distributions", degrees}, {"power_law", fits}, {"wcc", wcc_json}};

    // Disruption.
    const auto table = disruption::mdi_sweep(g, sweep_options(config, windows));
    disruption::write_mdi_csv(table, out / "mdi.csv");
    const auto main_rows = analytics::rows_at_window(table, config.main_window);
    const auto overall = analytics::summarize("overall", main_rows);

    // Analytics.
    analytics::TrendOptions trend_options;
    trend_options.lowess = {config.lowess_frac, config.lowess_iters};
    trend_options.log_x = config.log_x;
    const auto trend = analytics::build_trend(table, g, config.main_window, trend_options);
    analytics::write_trend_csv(trend, out / "trend.csv");

    const auto groups = analytics::group_summaries(table, g, config.main_window);
    analytics::write_summaries_csv(groups.by_scale, out / "scale_groups.csv");
    analytics::write_summaries_csv(groups.by_relation, out / "relation_groups.csv");

    std::vector<analytics::MdiSummary> histograms{overall};
    histograms.insert(histograms.end(), groups.by_scale.begin(), groups.by_scale.end());
    histograms.insert(histograms.end(), groups.by_relation.begin(), groups.by_relation.end());

    const auto temporal = analytics::temporal_report(table, g, boundaries, config.main_window);
    analytics::write_monthly_csv(temporal, out / "monthly.csv");
    analytics::write_periods_csv(temporal, out / "periods.csv");
    analytics::write_windows_csv(temporal, out / "windows.csv");
    for (const auto& p : temporal.periods) {
        histograms.push_back(p.summary);
    }
    for (const auto& w : temporal.windows) {
        histograms.push_back(w.summary);
    }
    analytics::write_histograms_csv(histograms, out / "histograms.csv");

    bundle["mdi"] = {{"main_window", config.main_window},
                     {"epsilon", config.epsilon},
                     {"eligible", disruption::eligible_focal_models(g).size()},
                     {"overall", overall.to_json()}};
    bundle["trend"] = trend.to_json();
    bundle["groups"] = groups.to_json();
    bundle["temporal"] = temporal.to_json();
    write_json(out / "bundle.json", bundle);
    spdlog::info("analyze: {} eligible focal models, bundle -> {}", main_rows.size(), (out / "bundle.json").string());
}

void cmd_synth(const RunConfig& config) {
    synth::SynthOptions options;
    options.nodes = config.nodes;
    options.seed = config.seed;
    options.attachment = config.attachment == "uniform" ? synth::Attachment::uniform : synth::Attachment::preferential;
    options.attractiveness = config.attractiveness;
    const auto snapshot = synth::generate(options);
    ingest::write_snapshot(snapshot, config.out_dir / "snapshot.jsonl");
    spdlog::info("synth: {} records", snapshot.records.size());
}

void ensure_logger() {
    if (!spdlog::get("lineage")) {
        spdlog::set_default_logger(spdlog::stderr_color_mt("lineage"));
    }
}

}  // namespace

int run(const std::vector<std::string>& args) {
    ensure_logger();

    RunConfig config;
    config.endpoint = ingest::default_endpoint();
    config.workers = std::max(1u, std::thread::hardware_concurrency());
    bool verbose = false;
    bool quiet = false;

    CLI::App app{"Model lineage network and disruption analysis", "lineage"};
    app.require_subcommand(1);
    app.add_option("--workers", config.workers, "Worker threads for the MDI sweep")->check(CLI::PositiveNumber);
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Only log errors");

    auto* ingest_cmd = app.add_subcommand("ingest", "Collect model metadata into a snapshot");
    ingest_cmd->add_option("--source", config.source, "Where records come from")
        ->required()
        ->check(CLI::IsMember({"api", "dump"}));
    ingest_cmd->add_option("--dump-path", config.dump_path, "Newline-delimited JSON dump")->check(CLI::ExistingFile);
    ingest_cmd->add_option("--strictness", config.strictness, "Bad dump rows: fail or skip")
        ->check(CLI::IsMember({"strict", "lenient"}))
        ->capture_default_str();
    ingest_cmd->add_option("--endpoint", config.endpoint, "Model listing URL (env LINEAGE_HUB_ENDPOINT)")
        ->capture_default_str();
    ingest_cmd->add_option("--page-size", config.page_size, "Records per page")
        ->check(CLI::Range(std::size_t{1}, std::size_t{10000}))
        ->capture_default_str();
    ingest_cmd->add_option("--max-records", config.max_records, "Stop after this many distinct models");
    ingest_cmd->add_option("--rate-limit", config.rate_limit, "Requests per second (0 = unthrottled)")
        ->capture_default_str();
    ingest_cmd->add_option("--retries", config.retries, "Retries per page")->check(CLI::NonNegativeNumber)->capture_default_str();
    ingest_cmd->add_flag("--resume", config.resume, "Continue from the checkpoint under --out");
    ingest_cmd->add_option("--out", config.out_dir, "Output directory")->required();

    auto* build_cmd = app.add_subcommand("build", "Extract lineage links and assemble the cleaned DAG");
    build_cmd->add_option("--snapshot", config.snapshot_path, "Snapshot file")->required()->check(CLI::ExistingFile);
    build_cmd->add_option("--out", config.out_dir, "Output directory")->required();

    const auto add_graph_inputs = [&](CLI::App* cmd) {
        cmd->add_option("--snapshot", config.snapshot_path, "Snapshot file (graph built on the fly)")
            ->check(CLI::ExistingFile);
        cmd->add_option("--graph", config.graph_dir, "Directory holding nodes.tsv and edges.tsv")
            ->check(CLI::ExistingDirectory);
        cmd->add_option("--epsilon", config.epsilon, "Denominator guard")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--out", config.out_dir, "Output directory")->required();
    };

    auto* mdi_cmd = app.add_subcommand("mdi", "Compute the disruption index table");
    add_graph_inputs(mdi_cmd);
    mdi_cmd->add_option("--windows", config.windows, "Observation windows in days")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    mdi_cmd->add_flag("--include-ineligible", config.include_ineligible, "Also list non-focal models with a reason");

    auto* analyze_cmd = app.add_subcommand("analyze", "Structure, disruption and temporal reports");
    analyze_cmd->alias("report");
    add_graph_inputs(analyze_cmd);
    analyze_cmd->add_option("--windows", config.windows, "Observation windows in days")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    analyze_cmd->add_option("--main-window", config.main_window, "Window used for distribution analyses")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    analyze_cmd->add_option("--period-boundaries", config.period_boundaries, "Period start dates, YYYY-MM-DD")
        ->delimiter(',');
    analyze_cmd->add_option("--lowess-frac", config.lowess_frac, "LOWESS neighbourhood share")
        ->check(CLI::Range(1e-9, 1.0))
        ->capture_default_str();
    analyze_cmd->add_option("--lowess-iters", config.lowess_iters, "LOWESS robustness passes")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    analyze_cmd->add_flag("--log-x", config.log_x, "Smooth against log in-degree");

    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic lineage snapshot");
    synth_cmd->add_option("--nodes", config.nodes, "Number of models")->capture_default_str();
    synth_cmd->add_option("--seed", config.seed, "Random seed")->capture_default_str();
    synth_cmd->add_option("--attachment", config.attachment, "Parent choice")
        ->check(CLI::IsMember({"preferential", "uniform"}))
        ->capture_default_str();
    synth_cmd->add_option("--attractiveness", config.attractiveness, "Initial attractiveness")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth_cmd->add_option("--out", config.out_dir, "Output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsageError;
    }

    spdlog::set_level(quiet ? spdlog::level::err : verbose ? spdlog::level::debug : spdlog::level::info);

    try {
        if (ingest_cmd->parsed()) {
            config.subcommand = "ingest";
            if (config.source == "dump" && config.dump_path.empty()) {
                throw UsageError{"--dump-path is required with --source dump"};
            }
            if (config.source == "api" && config.endpoint.empty()) {
                throw UsageError{"--endpoint is required with --source api"};
            }
        } else if (build_cmd->parsed()) {
            config.subcommand = "build";
        } else if (mdi_cmd->parsed()) {
            config.subcommand = "mdi";
            validate_graph_input(config);
            if (config.windows.empty()) {
                config.windows = {disruption::kMainWindowDays};
            }
        } else if (analyze_cmd->parsed()) {
            config.subcommand = "analyze";
            validate_graph_input(config);
            parse_boundaries(config.period_boundaries);
            if (config.windows.empty()) {
                config.windows = {30, 60, 90, 120, 150, 180};
            }
        } else if (synth_cmd->parsed()) {
            config.subcommand = "synth";
        }
        prepare_out_dir(config);

        if (config.subcommand == "ingest") {
            cmd_ingest(config);
        } else if (config.subcommand == "build") {
            cmd_build(config);
        } else if (config.subcommand == "mdi") {
            cmd_mdi(config);
        } else if (config.subcommand == "analyze") {
            cmd_analyze(config);
        } else {
            cmd_synth(config);
        }
        echo_config(config);
        return kOk;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
}

int run(int argc, const char* const* argv) {
    return run(std::vector<std::string>(argv, argv + argc));
}

}  // namespace lineage::app
