#include "mlnl/config.hpp"
#include "mlnl/runner.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read config file " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    int workers = 0;
    double grid_h = 0.0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory override");
    cmd->add_option("--workers", args.workers, "worker-thread count override");
    cmd->add_option("--grid-h", args.grid_h, "grid spacing override");
}

mlnl::ExperimentConfig load(const CommonArgs& args) {
    auto cfg = mlnl::parse_config(slurp(args.config_path));
    if (const char* env = std::getenv("MLNL_OUT")) cfg.output_dir = env;
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    if (args.workers > 0) cfg.workers = args.workers;
    if (args.grid_h > 0.0) cfg.h = args.grid_h;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mixed local-nonlocal elliptic laboratory"};
    app.require_subcommand(1);

    CommonArgs solve_args, reg_args, bar_args, serrin_args, kern_args;
    auto* solve_cmd = app.add_subcommand("solve", "solve the configured problem");
    add_common(solve_cmd, solve_args);
    auto* reg_cmd =
        app.add_subcommand("regularity", "solve and run the regularity suite");
    add_common(reg_cmd, reg_args);
    auto* bar_cmd =
        app.add_subcommand("barriers", "solve and run the barrier diagnostics");
    add_common(bar_cmd, bar_args);
    auto* serrin_cmd =
        app.add_subcommand("serrin", "overdetermined experiment on the domain");
    add_common(serrin_cmd, serrin_args);
    auto* kern_cmd =
        app.add_subcommand("check-kernel", "Monte Carlo kernel assumption check");
    add_common(kern_cmd, kern_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed()) return mlnl::run(load(solve_args));
        if (reg_cmd->parsed()) {
            auto cfg = load(reg_args);
            cfg.diag_regularity = true;
            return mlnl::run(cfg);
        }
        if (bar_cmd->parsed()) {
            auto cfg = load(bar_args);
            cfg.diag_barriers = true;
            return mlnl::run(cfg);
        }
        if (serrin_cmd->parsed()) {
            auto cfg = load(serrin_args);
            cfg.problem = "serrin";
            cfg.diag_overdetermined = true;
            return mlnl::run(cfg);
        }
        if (kern_cmd->parsed()) return mlnl::run_kernel_check(load(kern_args));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
