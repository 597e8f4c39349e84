// Batch verification front-end.  Loads a JSON job description, runs the
// requested suite, writes CSV/JSON reports and returns a CI-friendly exit
// code: 0 all instances below threshold, 1 threshold exceeded, 2 error.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "stint/stint.hpp"

int main(int argc, char** argv) {
    CLI::App app{"state-integral tetrahedral weight verifier"};

    std::string job_path;
    std::string out_dir;
    double threshold = 0.0;
    std::uint64_t seed = 0;
    int nodes = 0;

    app.add_option("--job", job_path, "job description (JSON)")->required();
    app.add_option("--out", out_dir, "output directory (overrides job)");
    app.add_option("--threshold", threshold, "residual threshold (overrides job)");
    app.add_option("--seed", seed, "sampling seed (overrides job)");
    app.add_option("--nodes", nodes, "grid node count (overrides job)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    try {
        stint::jobs::Job job = stint::jobs::load_job(job_path);
        if (!out_dir.empty()) job.out = out_dir;
        if (threshold > 0.0) job.threshold = threshold;
        if (seed != 0) job.seed = seed;
        if (nodes > 0) job.grid.nodes = nodes;

        stint::jobs::RunOutcome out = stint::jobs::run_job(job);
        stint::jobs::write_reports(out.rows, job.out);

        for (const auto& r : out.rows)
            std::printf("%-18s %-8s %s rel=%.3e grid=%s\n", r.command.c_str(),
                        r.model.c_str(), stint::short_digest(r.digest).c_str(), r.rel,
                        r.grid_meta.c_str());
        for (const auto& f : out.failures) std::fprintf(stderr, "FAIL: %s\n", f.c_str());
        if (out.exit_code == 0)
            std::printf("OK: %zu instance(s) below threshold\n", out.rows.size());
        return out.exit_code;
    } catch (const stint::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
