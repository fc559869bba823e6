#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "ymh/cli.hpp"

int main(int argc, char** argv) {
    // YMH_THREADS caps internal parallelism; the field kernels run serially,
    // so any positive value is accepted and one worker is used.
    if (const char* env = std::getenv("YMH_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) {
            std::cerr << "error: YMH_THREADS must be a positive integer\n";
            return 1;
        }
    }

    CLI::App app{"Gradient flow of an abelian gauge-Higgs energy on the flat 2-torus"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "integrate a flow described by a config file");
    run->add_option("config", config_path, "path to key = value config")->required();

    std::string gf_in, gf_out;
    CLI::App* gauge_fix = app.add_subcommand("gauge-fix", "Coulomb-fix a snapshot's connection");
    gauge_fix->add_option("in", gf_in, "input snapshot")->required();
    gauge_fix->add_option("out", gf_out, "output snapshot")->required();

    std::string r_in, r_out, r_field = "density";
    CLI::App* render = app.add_subcommand("render", "render a snapshot field to a P5 graymap");
    render->add_option("in", r_in, "input snapshot")->required();
    render->add_option("out", r_out, "output .pgm image")->required();
    render->add_option("--field", r_field, "density | curvature | moment");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return ymh::cmd_run(config_path);
    if (gauge_fix->parsed()) return ymh::cmd_gauge_fix(gf_in, gf_out);
    if (render->parsed()) return ymh::cmd_render(r_in, r_out, r_field);
    return 1;
}
