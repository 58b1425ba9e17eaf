/*
 * nlslab — batch experiment runner.
 *
 *   nlslab <command> --config <file> [--seed S] [--workers W] [--out DIR]
 *
 * Precedence for seed/workers/output_dir: flag > environment (NLSLAB_SEED,
 * NLSLAB_WORKERS, NLSLAB_OUT) > config file > default.  Writes record.json
 * (plus CSV tables) to the output directory; exits 0 iff every asserted
 * tolerance passed, 2 on configuration errors.
 */
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "nlslab/run_config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"nlslab batch experiment runner"};
    std::string command, config_path, out_dir;
    std::string seed_str, workers_str;
    app.add_option("command", command, "experiment to run")
        ->required()
        ->check(CLI::IsMember({"sample", "evolve", "smoothing-scan", "energy-derivative-check",
                               "counting-verify", "cancellation-verify", "picard-divergence",
                               "moment-scan", "bound-eval"}));
    app.add_option("--config", config_path, "key = value config file");
    app.add_option("--seed", seed_str, "base seed (overrides env and file)");
    app.add_option("--workers", workers_str, "worker count (must not change results)");
    app.add_option("--out", out_dir, "output directory");
    CLI11_PARSE(app, argc, argv);

    try {
        std::string text;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << "error: cannot read config file " << config_path << "\n";
                return 2;
            }
            std::stringstream ss;
            ss << in.rdbuf();
            text = ss.str();
        }
        nlslab::RunConfig cfg = nlslab::parse_config(text);
        if (!cfg.command.empty() && cfg.command != command) {
            std::cerr << "error: config file names command '" << cfg.command
                      << "' but the command line says '" << command << "'\n";
            return 2;
        }
        cfg.command = command;

        // precedence: flag > env > file
        if (const char* e = std::getenv("NLSLAB_SEED"))
            cfg.seed = std::stoull(std::string(e));
        if (const char* e = std::getenv("NLSLAB_WORKERS")) cfg.workers = std::stoi(std::string(e));
        if (const char* e = std::getenv("NLSLAB_OUT")) cfg.output_dir = std::string(e);
        if (!seed_str.empty()) cfg.seed = std::stoull(seed_str);
        if (!workers_str.empty()) cfg.workers = std::stoi(workers_str);
        if (!out_dir.empty()) cfg.output_dir = out_dir;

        nlslab::validate_config(cfg);
        nlslab::RunRecord record = nlslab::dispatch(cfg);
        std::cout << (record.pass ? "PASS" : "FAIL") << " " << record.record_path << "\n";
        return record.pass ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
