// srbridge command line: simulate unconditioned paths, train score networks,
// sample reverse-time bridges, export score-field grids.

#include <CLI11.hpp>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "srbridge/bridge.hpp"
#include "srbridge/config.hpp"
#include "srbridge/csv.hpp"
#include "srbridge/manifest.hpp"
#include "srbridge/network_io.hpp"
#include "srbridge/paths.hpp"
#include "srbridge/svg.hpp"
#include "srbridge/train.hpp"

namespace fs = std::filesystem;
using namespace srb;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;
    bool svg = false;
    bool quiet = false;
    std::string theta_path;
};

void log_line(const CommonArgs& a, const std::string& msg) {
    if (!a.quiet) std::cerr << msg << "\n";
}

struct GeometrySpec {
    std::string id;
    SubRiemannianModel model;
    Scheme default_scheme;
};

GeometrySpec read_geometry(const FlatConfig& cfg) {
    GeometrySpec g;
    g.id = cfg.get_string("geometry");
    if (g.id == "heisenberg") {
        const int pairs = static_cast<int>(cfg.get_int("k", 1));
        g.model = heisenberg_model(pairs);
        g.default_scheme = Scheme::heisenberg_exact;
    } else if (g.id == "euclidean") {
        const int d = static_cast<int>(cfg.get_int("d", 1));
        Point drift;
        if (cfg.has("drift")) drift = cfg.get_point("drift");
        g.model = euclidean_model(d, drift);
        g.default_scheme = Scheme::euler;
    } else if (g.id == "custom-step2") {
        Point drift;
        if (cfg.has("drift")) drift = cfg.get_point("drift");
        g.model = custom_step2_model(cfg.get_double("alpha", 0.0), cfg.get_double("beta", 0.0), drift);
        g.default_scheme = Scheme::taylor;
    } else {
        throw ConfigError("geometry must be one of heisenberg|euclidean|custom-step2, got '" +
                          g.id + "'");
    }
    return g;
}

RunManifest make_manifest(const std::string& command, const FlatConfig& cfg, std::uint64_t seed) {
    RunManifest m;
    m.command = command;
    m.config = cfg.entries();
    m.config["seed"] = std::to_string(seed);  // effective seed
    m.seed = seed;
    return m;
}

std::uint64_t effective_seed(const FlatConfig& cfg, const CommonArgs& args) {
    if (args.seed_override) {
        cfg.get_u64("seed", 0);  // mark the key as consumed
        return *args.seed_override;
    }
    return cfg.get_u64("seed", 0);
}

void write_paths_csv(const fs::path& path, const PathBatch& batch, int d) {
    std::vector<std::string> cols = {"path_id", "step", "t"};
    for (int i = 1; i <= d; ++i) cols.push_back("x" + std::to_string(i));
    CsvWriter csv(path.string(), cols);
    for (const PathSample& p : batch) {
        for (std::size_t i = 0; i < p.states.size(); ++i) {
            csv.field(static_cast<long>(p.path_id));
            csv.field(static_cast<long>(i));
            csv.field(p.times[i]);
            for (int c = 0; c < d; ++c) csv.field(p.states[i](c));
            csv.end_row();
        }
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const CommonArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    const FlatConfig cfg = FlatConfig::parse_file(args.config_path);
    const GeometrySpec geo = read_geometry(cfg);
    const std::uint64_t seed = effective_seed(cfg, args);

    const Point x0 = cfg.get_point("x0", Point::Zero(geo.model.d));
    if (x0.size() != geo.model.d) throw ConfigError("x0 has wrong dimension for the geometry");
    const double T = cfg.get_double("T");
    const int n = static_cast<int>(cfg.get_int("n"));
    const int K = static_cast<int>(cfg.get_int("K"));
    const Scheme scheme = cfg.has("scheme") ? scheme_from_string(cfg.get_string("scheme"))
                                            : geo.default_scheme;
    const int K2 = static_cast<int>(cfg.get_int("K2", 10));
    const LevyMethod method = levy_method_from_string(cfg.get_string("levy_method", "polynomial"));
    cfg.reject_unknown();

    RngStream rng = RngStream(seed).derive(stream_label::simulate);
    log_line(args, "simulate: " + std::to_string(K) + " paths, n = " + std::to_string(n));
    const PathBatch batch = sample_batch(geo.model, x0, T, n, K, rng, scheme, K2, method);

    fs::create_directories(args.out_dir);
    const fs::path csv_path = fs::path(args.out_dir) / "paths.csv";
    write_paths_csv(csv_path, batch, geo.model.d);

    RunManifest man = make_manifest("simulate", cfg, seed);
    man.outputs = {"paths.csv"};
    man.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(man, fs::path(args.out_dir) / "manifest.json");
    log_line(args, "wrote " + csv_path.string());
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

TrainingConfig read_training_config(const FlatConfig& cfg, std::uint64_t seed) {
    TrainingConfig c;
    c.geometry = cfg.get_string("geometry");
    c.heis_pairs = static_cast<int>(cfg.get_int("k", 1));
    c.eucl_dim = static_cast<int>(cfg.get_int("d", 1));
    c.custom_alpha = cfg.get_double("alpha", 0.0);
    c.custom_beta = cfg.get_double("beta", 0.0);
    const SubRiemannianModel probe = model_from_config(c);
    c.x0 = cfg.get_point("x0", Point::Zero(probe.d));
    c.T = cfg.get_double("T");
    c.n = static_cast<int>(cfg.get_int("n"));
    c.K = static_cast<int>(cfg.get_int("K"));
    c.batches_per_epoch = static_cast<int>(cfg.get_int("batches_per_epoch"));
    c.epochs = static_cast<int>(cfg.get_int("epochs"));
    const std::string default_loss =
        c.geometry == "heisenberg" ? "denoising_heisenberg"
        : (c.geometry == "euclidean" ? "denoising_euclidean" : "denoising_general");
    c.loss_kind = loss_kind_from_string(cfg.get_string("loss_kind", default_loss));
    std::string default_scheme = "euler";
    if (c.loss_kind == LossKind::denoising_heisenberg) default_scheme = "heisenberg_exact";
    if (c.loss_kind == LossKind::denoising_general) default_scheme = "taylor";
    c.scheme = scheme_from_string(cfg.get_string("scheme", default_scheme));
    c.K2 = static_cast<int>(cfg.get_int("K2", 10));
    c.levy_method = levy_method_from_string(cfg.get_string("levy_method", "polynomial"));
    c.lr = cfg.get_double("lr", 1e-3);
    c.seed = seed;
    c.hidden_layers = static_cast<int>(cfg.get_int("hidden_layers", 3));
    c.hidden_width = static_cast<int>(cfg.get_int("hidden_width", 15));
    c.activation = activation_from_string(cfg.get_string("activation", "elu"));
    if (c.loss_kind == LossKind::divergence && c.activation == Activation::relu)
        std::cerr << "warning: divergence loss with relu will fail at the first divergence "
                     "evaluation\n";
    return c;
}

int cmd_train(const CommonArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    const FlatConfig cfg = FlatConfig::parse_file(args.config_path);
    const std::uint64_t seed = effective_seed(cfg, args);
    const TrainingConfig tc = read_training_config(cfg, seed);
    cfg.reject_unknown();

    log_line(args, "train: " + std::to_string(tc.epochs) + " epochs x " +
                       std::to_string(tc.batches_per_epoch) + " batches");
    auto [theta, report] = train(tc);

    fs::create_directories(args.out_dir);
    save_network(theta, (fs::path(args.out_dir) / "theta.json").string());
    {
        CsvWriter csv((fs::path(args.out_dir) / "loss_trace.csv").string(),
                      {"epoch", "loss", "seconds"});
        for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
            csv.field(static_cast<long>(e + 1));
            csv.field(report.epoch_loss[e]);
            csv.field(report.epoch_seconds[e]);
            csv.end_row();
        }
    }

    RunManifest man = make_manifest("train", cfg, seed);
    man.outputs = {"theta.json", "loss_trace.csv"};
    man.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(man, fs::path(args.out_dir) / "manifest.json");
    log_line(args, "wrote " + (fs::path(args.out_dir) / "theta.json").string());
    return 0;
}

// ---------------------------------------------------------------------------
// bridge
// ---------------------------------------------------------------------------

ScoreField make_score_source(const std::string& source, const GeometrySpec& geo, const Point& x0,
                             const std::string& theta_path) {
    if (source == "network") {
        if (theta_path.empty()) throw ConfigError("score_source = network requires --theta PATH");
        NetworkParams theta = load_network(theta_path);
        if (theta.input_dim() != geo.model.d + 1 || theta.output_dim() != geo.model.k)
            throw ConfigError("network file does not match the geometry (expects input " +
                              std::to_string(geo.model.d + 1) + ", output " +
                              std::to_string(geo.model.k) + ")");
        return network_score_field(theta);
    }
    if (source == "analytic-heisenberg") {
        if (geo.model.heisenberg_pairs < 1)
            throw ConfigError("analytic-heisenberg score requires the heisenberg geometry");
        return analytic_heisenberg_score(x0);
    }
    if (source == "analytic-euclidean") {
        if (geo.model.k != geo.model.d)
            throw ConfigError("analytic-euclidean score requires the euclidean geometry");
        return analytic_euclidean_score(x0);
    }
    throw ConfigError("score_source must be network|analytic-heisenberg|analytic-euclidean");
}

nlohmann::json curves_json(const SummaryCurves& c) {
    return {{"q25", c.q25}, {"q50", c.q50}, {"q75", c.q75}};
}

int cmd_bridge(const CommonArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    const FlatConfig cfg = FlatConfig::parse_file(args.config_path);
    const GeometrySpec geo = read_geometry(cfg);
    const std::uint64_t seed = effective_seed(cfg, args);

    BridgeConfig bc;
    bc.x0 = cfg.get_point("x0");
    bc.xT = cfg.get_point("xT");
    bc.T = cfg.get_double("T");
    bc.n = static_cast<int>(cfg.get_int("n"));
    bc.num_samples = static_cast<int>(cfg.get_int("num_samples"));
    const std::string source = cfg.get_string("score_source");
    bc.score = make_score_source(source, geo, bc.x0, args.theta_path);
    cfg.reject_unknown();

    log_line(args, "bridge: " + std::to_string(bc.num_samples) + " reverse paths from xT");
    RngStream rng = RngStream(seed).derive(stream_label::bridge);
    const BridgeEnsemble ens = sample_bridge(geo.model, bc, rng);

    fs::create_directories(args.out_dir);
    write_paths_csv(fs::path(args.out_dir) / "ensemble.csv", ens.paths, geo.model.d);

    nlohmann::json summary;
    summary["schema"] = "srbridge-bridge-summary.v1";
    summary["config"] = cfg.entries();
    summary["config"]["seed"] = std::to_string(seed);
    summary["seed"] = seed;
    summary["times"] = ens.times;
    summary["horizontal_norm"] = curves_json(ens.summary.horizontal);
    summary["vertical"] = curves_json(ens.summary.vertical);
    write_atomic(fs::path(args.out_dir) / "summary.json", summary.dump(1) + "\n");

    RunManifest man = make_manifest("bridge", cfg, seed);
    man.outputs = {"ensemble.csv", "summary.json"};
    if (args.svg) {
        SvgPlot plot(720, 480, "bridge summary (solid: median, dashed: quartiles)");
        plot.add_line(ens.times, ens.summary.horizontal.q50, "#c22", 2.0);
        plot.add_line(ens.times, ens.summary.horizontal.q25, "#c22", 1.0, "4 3");
        plot.add_line(ens.times, ens.summary.horizontal.q75, "#c22", 1.0, "4 3");
        plot.add_line(ens.times, ens.summary.vertical.q50, "#22c", 2.0);
        plot.add_line(ens.times, ens.summary.vertical.q25, "#22c", 1.0, "4 3");
        plot.add_line(ens.times, ens.summary.vertical.q75, "#22c", 1.0, "4 3");
        write_atomic(fs::path(args.out_dir) / "summary.svg", plot.render());
        man.outputs.push_back("summary.svg");
    }
    man.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(man, fs::path(args.out_dir) / "manifest.json");
    return 0;
}

// ---------------------------------------------------------------------------
// scoregrid
// ---------------------------------------------------------------------------

struct GridAxis {
    double min = 0, max = 0;
    int count = 1;
};

GridAxis parse_axis(const FlatConfig& cfg, const std::string& key) {
    const Point v = cfg.get_point(key);
    if (v.size() != 3) throw ConfigError("grid axis '" + key + "' must be min,max,count");
    GridAxis a;
    a.min = v(0);
    a.max = v(1);
    a.count = static_cast<int>(v(2));
    if (a.count < 1 || (a.count > 1 && a.max <= a.min))
        throw ConfigError("grid axis '" + key + "' is malformed");
    return a;
}

int cmd_scoregrid(const CommonArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    const FlatConfig cfg = FlatConfig::parse_file(args.config_path);
    const GeometrySpec geo = read_geometry(cfg);
    const std::uint64_t seed = effective_seed(cfg, args);
    const double t = cfg.get_double("t");
    if (t <= 0) throw ConfigError("scoregrid: t must be positive");

    const int d = geo.model.d;
    std::vector<GridAxis> axes;
    for (int i = 1; i <= d; ++i) axes.push_back(parse_axis(cfg, "grid_" + std::to_string(i)));
    if (args.theta_path.empty()) throw ConfigError("scoregrid requires --theta PATH");
    NetworkParams theta = load_network(args.theta_path);
    if (theta.input_dim() != d + 1 || theta.output_dim() != geo.model.k)
        throw ConfigError("network file does not match the geometry");
    cfg.reject_unknown();

    std::vector<std::string> cols;
    for (int i = 1; i <= d; ++i) cols.push_back("x" + std::to_string(i));
    for (int j = 1; j <= geo.model.k; ++j) cols.push_back("s" + std::to_string(j));
    for (int i = 1; i <= d; ++i) cols.push_back("v" + std::to_string(i));

    fs::create_directories(args.out_dir);
    CsvWriter csv((fs::path(args.out_dir) / "scoregrid.csv").string(), cols);

    long rows = 1;
    for (const GridAxis& a : axes) rows *= a.count;
    std::vector<int> idx(d, 0);
    // for the optional slice plot
    std::vector<int> free_axes;
    for (int i = 0; i < d; ++i)
        if (axes[i].count > 1) free_axes.push_back(i);
    struct Arrow {
        double x, y, vx, vy;
    };
    std::vector<Arrow> arrows;

    for (long r = 0; r < rows; ++r) {
        Point x(d);
        for (int i = 0; i < d; ++i) {
            const GridAxis& a = axes[i];
            x(i) = (a.count == 1) ? a.min
                                  : a.min + (a.max - a.min) * idx[i] / static_cast<double>(a.count - 1);
        }
        const HorizontalCoeffs s = forward(theta, t, x);
        const Point v = geo.model.frame(x) * s;
        for (int i = 0; i < d; ++i) csv.field(x(i));
        for (int j = 0; j < geo.model.k; ++j) csv.field(s(j));
        for (int i = 0; i < d; ++i) csv.field(v(i));
        csv.end_row();
        if (free_axes.size() == 2)
            arrows.push_back({x(free_axes[0]), x(free_axes[1]), v(free_axes[0]), v(free_axes[1])});
        // odometer over grid indices, last axis fastest
        for (int i = d - 1; i >= 0; --i) {
            if (++idx[i] < axes[i].count) break;
            idx[i] = 0;
        }
    }

    RunManifest man = make_manifest("scoregrid", cfg, seed);
    man.outputs = {"scoregrid.csv"};
    if (args.svg && free_axes.size() == 2) {
        double vmax = 1e-12;
        for (const Arrow& a : arrows) vmax = std::max(vmax, std::hypot(a.vx, a.vy));
        const double cell0 = (axes[free_axes[0]].max - axes[free_axes[0]].min) /
                             std::max(1, axes[free_axes[0]].count - 1);
        const double cell1 = (axes[free_axes[1]].max - axes[free_axes[1]].min) /
                             std::max(1, axes[free_axes[1]].count - 1);
        const double scale = 0.45 * std::min(cell0, cell1) / vmax;
        SvgPlot plot(640, 640, "score field slice");
        for (const Arrow& a : arrows)
            plot.add_line({a.x, a.x + scale * a.vx}, {a.y, a.y + scale * a.vy}, "#338", 1.2);
        write_atomic(fs::path(args.out_dir) / "scoregrid.svg", plot.render());
        man.outputs.push_back("scoregrid.svg");
    }
    man.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(man, fs::path(args.out_dir) / "manifest.json");
    log_line(args, "wrote " + std::to_string(rows) + " grid rows");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"score-based bridge sampling for step-2 sub-Riemannian diffusions"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App* sub, bool needs_theta) {
        sub->add_option("--config", args.config_path, "flat key = value config file")->required();
        sub->add_option("--out", args.out_dir, "output directory (default .)");
        sub->add_option("--seed", args.seed_override, "seed override (u64)");
        sub->add_flag("--quiet", args.quiet, "suppress progress output");
        if (needs_theta)
            sub->add_option("--theta", args.theta_path, "network parameter JSON file");
        return sub;
    };

    CLI::App* sim = add_common(app.add_subcommand("simulate", "sample unconditioned paths"), false);
    CLI::App* trn = add_common(app.add_subcommand("train", "train a score network"), false);
    CLI::App* brg = add_common(app.add_subcommand("bridge", "sample reverse-time bridges"), true);
    brg->add_flag("--svg", args.svg, "emit a summary plot");
    CLI::App* grid = add_common(app.add_subcommand("scoregrid", "export the score on a grid"), true);
    grid->add_flag("--svg", args.svg, "emit a slice plot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(args);
        if (trn->parsed()) return cmd_train(args);
        if (brg->parsed()) return cmd_bridge(args);
        if (grid->parsed()) return cmd_scoregrid(args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
