#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "gammalab/gammalab.h"

namespace {

int fail_usage(const char* what)
{
    std::fprintf(stderr, "gammalab: %s: %s\n", what, gl_last_error());
    return 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Envelope, measure and recovery-sequence experiments"};
    app.set_version_flag("--version", std::string(gl_version()));
    app.require_subcommand(1);

    const char* names[] = {"envelope", "measures", "wriggle", "mm", "nonlocal", "recover", "sandwich", "minimize"};
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    for (const char* name : names) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        sub->add_option("-c,--config", config_path, "key = value config file")->check(CLI::ExistingFile);
        sub->add_option("-o,--out", out_dir, "output directory");
        sub->add_option("-s,--set", overrides, "override as key=value");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    const std::string subcommand = app.get_subcommands().front()->get_name();

    gl_experiment* exp = nullptr;
    if (gl_experiment_create(subcommand.c_str(), &exp) != GL_OK)
        return fail_usage("create");
    if (!config_path.empty() && gl_experiment_load_config(exp, config_path.c_str()) != GL_OK) {
        gl_experiment_free(exp);
        return fail_usage("config");
    }
    for (const auto& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "gammalab: override '%s' is not key=value\n", kv.c_str());
            gl_experiment_free(exp);
            return 1;
        }
        if (gl_experiment_set(exp, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()) != GL_OK) {
            gl_experiment_free(exp);
            return fail_usage("set");
        }
    }
    int code = 0;
    if (gl_experiment_run(exp, out_dir.c_str(), &code) != GL_OK) {
        gl_experiment_free(exp);
        return fail_usage("run");
    }
    if (code != 0)
        std::fprintf(stderr, "gammalab %s: %s\n", subcommand.c_str(), gl_experiment_message(exp));
    else
        std::printf("gammalab %s: wrote %s\n", subcommand.c_str(), out_dir.c_str());
    gl_experiment_free(exp);
    return code;
}
