#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mfsg/commands.hpp"
#include "mfsg/errors.hpp"
#include "mfsg/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Multifractal spectra and random dynamics of rational semigroups"};
    std::string command, config_path, out_dir;
    int workers = 0;
    bool force = false;
    app.add_option("command", command, "verify | pressure | spectrum | rigidity | coliseum | hoelder | bound | all")
        ->required()
        ->check(CLI::IsMember(mfsg::command_names()));
    app.add_option("--config", config_path, "run configuration (JSON)")->required();
    app.add_flag("--force", force, "compute spectra even when condition checks fail");
    app.add_option("--workers", workers, "worker threads (default: MF_SEMIGROUP_WORKERS or 1)")->check(CLI::Range(1, 1024));
    app.add_option("--out", out_dir, "output directory, overriding output_dir");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (workers == 0) {
        if (const char* env = std::getenv("MF_SEMIGROUP_WORKERS")) {
            try {
                workers = std::stoi(env);
            } catch (const std::exception&) {
                workers = 0;
            }
            if (workers < 1 || workers > 1024) {
                std::cerr << "error: MF_SEMIGROUP_WORKERS must be an integer in [1, 1024]\n";
                return 2;
            }
        } else {
            workers = 1;
        }
    }
    mfsg::set_worker_count(workers);

    mfsg::RunConfig config;
    try {
        config = mfsg::load_config(config_path);
    } catch (const mfsg::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    mfsg::CommandOptions options;
    options.force = force;
    if (!out_dir.empty()) options.out_dir = out_dir;
    return mfsg::run_command(command, config, options, std::cout, std::cerr);
}
