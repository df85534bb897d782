// sasaki-cone: decides existence of transverse Sasaki-Einstein metrics and
// Sasaki-Ricci solitons from a moment-cone datum, by exact polyhedral
// computation and controlled quadrature.
//
// Exit codes: 0 success, 2 criterion/validation fails (still a successful
// computation), 1 computational error.

#include "sasaki/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

struct GlobalArgs {
    std::string input_path;
    double tol = 1e-10;
    unsigned quad_depth = 12;
    int chart = 0; // 1-based, 0 = automatic
    std::string mc_check;
    unsigned long seed = 12345;
    bool timings = false;
    bool no_rescale = false;
    std::string output = "json";
};

void add_common(CLI::App* cmd, GlobalArgs& args) {
    cmd->add_option("input", args.input_path, "input JSON file")->required();
    cmd->add_option("--tol", args.tol, "quadrature relative tolerance");
    cmd->add_option("--quad-depth", args.quad_depth, "maximum dyadic subdivision depth");
    cmd->add_option("--chart", args.chart, "eliminated coordinate of the hyperplane chart (1-based)");
    cmd->add_option("--mc-check", args.mc_check,
                    "run the Monte-Carlo oracle alongside (optionally =samples)")
        ->expected(0, 1)
        ->default_str("");
    cmd->add_option("--seed", args.seed, "seed for randomized checks");
    cmd->add_flag("--timings", args.timings, "include wall-clock timings in reports");
    cmd->add_flag("--no-rescale", args.no_rescale, "fail instead of rescaling xi to gamma_0(xi) = -(n+1)");
    cmd->add_option("--output", args.output, "json or text")->check(CLI::IsMember({"json", "text"}));
}

sasaki::RunOptions make_options(const GlobalArgs& args, const CLI::App* cmd) {
    sasaki::RunOptions opt;
    opt.tol = args.tol;
    opt.quad_depth = args.quad_depth;
    if (args.chart > 0) opt.chart = static_cast<std::size_t>(args.chart - 1);
    if (cmd->count("--mc-check"))
        opt.mc_check = args.mc_check.empty() ? 1000000ull : std::stoull(args.mc_check);
    opt.seed = args.seed;
    opt.timings = args.timings;
    opt.auto_rescale = !args.no_rescale;
    return opt;
}

void emit(const sasaki::Json& report, const std::string& mode) {
    if (mode == "text") {
        sasaki::render_text(report, std::cout);
    } else {
        std::cout << report.dump(2) << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"moment-cone criteria for transverse Sasaki-Einstein metrics and Ricci solitons"};
    app.require_subcommand(1);

    GlobalArgs args;
    std::string xi2;
    std::string xi_json;
    std::string xi2_range;
    int vary_coord = 2;
    std::string resolution = "1/1000";
    unsigned long scan = 25;

    auto* validate = app.add_subcommand("validate", "good-cone conditions (C1), (C2) and friends");
    add_common(validate, args);
    auto* gamma0 = app.add_subcommand("gamma0", "solve the transverse Fano normalization gamma_0");
    add_common(gamma0, args);
    auto* polytope = app.add_subcommand("polytope", "characteristic and projected polytopes");
    add_common(polytope, args);
    auto* criterion = app.add_subcommand("criterion", "Sasaki-Einstein barycenter criterion");
    add_common(criterion, args);
    auto* soliton = app.add_subcommand("soliton", "Sasaki-Ricci soliton solve and criterion");
    add_common(soliton, args);
    soliton->add_option("--xi2", xi2, "override the second coordinate of xi (rational)");
    soliton->add_option("--xi", xi_json, "override xi as a JSON array of rationals");
    auto* sweep = app.add_subcommand("sweep", "soliton verdicts along a Reeb path in Sigma_O");
    add_common(sweep, args);
    sweep->add_option("--xi2-range", xi2_range, "from:to:steps for the varied coordinate")->required();
    sweep->add_option("--vary-coord", vary_coord, "1-based coordinate of xi varied by the sweep");
    sweep->add_option("--resolution", resolution, "bisection resolution for verdict transitions");
    auto* kenergy = app.add_subcommand("kenergy", "reduced K-energy functionals on P'");
    add_common(kenergy, args);
    kenergy->add_option("--scan", scan, "number of random PL functions in the positivity scan");

    CLI11_PARSE(app, argc, argv);
    CLI::App* cmd = app.get_subcommands().front();

    try {
        const auto input = sasaki::load_input(args.input_path);
        auto opt = make_options(args, cmd);
        opt.scan_count = scan;
        sasaki::CommandResult result;
        if (cmd == validate) {
            result = sasaki::run_validate(input, opt);
        } else if (cmd == gamma0) {
            result = sasaki::run_gamma0(input, opt);
        } else if (cmd == polytope) {
            result = sasaki::run_polytope(input, opt);
        } else if (cmd == criterion) {
            result = sasaki::run_criterion(input, opt);
        } else if (cmd == soliton) {
            std::optional<sasaki::Vec> xi_override;
            if (!xi_json.empty()) {
                xi_override = sasaki::io_detail::parse_vector(sasaki::Json::parse(xi_json), "--xi",
                                                              input.spec.group.rank);
            } else if (!xi2.empty()) {
                if (!input.spec.reeb) throw sasaki::Error("--xi2 requires a reeb vector in the input");
                sasaki::Vec xi = *input.spec.reeb;
                if (xi.size() < 2) throw sasaki::Error("--xi2 needs rank >= 2");
                xi[1] = sasaki::parse_rational(xi2);
                xi_override = xi;
            }
            result = sasaki::run_soliton(input, opt, xi_override);
        } else if (cmd == sweep) {
            sasaki::SweepSpec spec;
            const auto c1 = xi2_range.find(':');
            const auto c2 = xi2_range.rfind(':');
            if (c1 == std::string::npos || c2 == c1)
                throw sasaki::Error("--xi2-range: expected from:to:steps");
            spec.from = sasaki::parse_rational(xi2_range.substr(0, c1));
            spec.to = sasaki::parse_rational(xi2_range.substr(c1 + 1, c2 - c1 - 1));
            spec.steps = std::stoul(xi2_range.substr(c2 + 1));
            spec.vary_coord = static_cast<std::size_t>(vary_coord - 1);
            spec.resolution = sasaki::parse_rational(resolution);
            result = sasaki::run_sweep(input, opt, spec);
        } else if (cmd == kenergy) {
            result = sasaki::run_kenergy(input, opt);
        }
        emit(result.report, args.output);
        return result.exit_code;
    } catch (const sasaki::ObstructionError& e) {
        sasaki::Json report;
        report["obstruction"] = e.what();
        emit(report, args.output);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
