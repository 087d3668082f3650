// Command-line front end over the kwidth C API.
//
//   kwidth run      --config scenario.cfg [--seed S] [--out path] [--format csv|json] [--threads k]
//   kwidth certify  ... (certificates only)
//   kwidth estimate ... (upper estimates only)
//   kwidth selfcheck
//
// Exit codes: 0 success, 1 validation error, 2 pipeline error, 3 selfcheck failure.

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "kwidth/kwidth.h"

namespace {

int exit_code_for(kw_status s) {
    switch (s) {
        case KW_OK:
            return 0;
        case KW_ERR_INVALID_ARGUMENT:
        case KW_ERR_INVALID_EXPONENT:
        case KW_ERR_UNSUPPORTED_EXPONENT:
        case KW_ERR_DIMENSION_MISMATCH:
        case KW_ERR_GROUP_TOO_LARGE:
        case KW_ERR_SIZE_OVERFLOW:
        case KW_ERR_INVALID_LAW:
        case KW_ERR_CONFIG:
            return 1;
        default:
            return 2;
    }
}

struct RunArgs {
    std::string config;
    std::string out;
    std::string format;
    uint64_t seed = 0;
    bool has_seed = false;
    int threads = 1;
};

void add_run_options(CLI::App* cmd, RunArgs& args) {
    cmd->add_option("--config", args.config, "scenario config file")->required();
    cmd->add_option("--seed", args.seed, "override the config seed")
        ->each([&args](const std::string&) { args.has_seed = true; });
    cmd->add_option("--out", args.out, "output path (default: the config's output.path)");
    cmd->add_option("--format", args.format, "csv or json (default: the config's format)");
    cmd->add_option("--threads", args.threads, "worker threads for grid cells")
        ->check(CLI::PositiveNumber);
}

int run_command(const RunArgs& args, int parts) {
    kw_table* table = nullptr;
    kw_status st = kw_run_scenario_file(args.config.c_str(), parts, args.threads,
                                        args.has_seed ? 1 : 0, args.seed, &table);
    if (st != KW_OK) {
        std::fprintf(stderr, "error: %s\n", kw_last_error());
        return exit_code_for(st);
    }
    std::string out_path = !args.out.empty() ? args.out : kw_table_output_path(table);
    std::string format = !args.format.empty() ? args.format : kw_table_output_format(table);
    if (format.empty()) format = "csv";

    int code = 0;
    if (!out_path.empty()) {
        st = kw_table_write(table, out_path.c_str(), format.c_str());
        if (st != KW_OK) {
            std::fprintf(stderr, "error: %s\n", kw_last_error());
            code = exit_code_for(st);
        } else {
            std::fprintf(stderr, "wrote %lld rows to %s\n",
                         static_cast<long long>(kw_table_row_count(table)), out_path.c_str());
        }
    } else {
        char* text = nullptr;
        st = format == "json" ? kw_table_to_json(table, &text)
                              : kw_table_to_csv(table, &text);
        if (st != KW_OK) {
            std::fprintf(stderr, "error: %s\n", kw_last_error());
            code = exit_code_for(st);
        } else {
            std::fputs(text, stdout);
            kw_string_free(text);
        }
    }
    if (code == 0 && kw_table_error_count(table) > 0) {
        std::fprintf(stderr, "%lld row(s) recorded pipeline errors\n",
                     static_cast<long long>(kw_table_error_count(table)));
        code = 2;
    }
    kw_table_free(table);
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kwidth: certified lower bounds vs numerical upper bounds for "
                 "Kolmogorov widths in l_q^N"};
    app.require_subcommand(1);

    RunArgs run_args, certify_args, estimate_args;
    CLI::App* run_cmd = app.add_subcommand("run", "certificates + estimates + gap report");
    add_run_options(run_cmd, run_args);
    CLI::App* certify_cmd = app.add_subcommand("certify", "certificates only");
    add_run_options(certify_cmd, certify_args);
    CLI::App* estimate_cmd = app.add_subcommand("estimate", "upper estimates only");
    add_run_options(estimate_cmd, estimate_args);
    CLI::App* selfcheck_cmd =
        app.add_subcommand("selfcheck", "run the fast acceptance subset (< 60 s)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (selfcheck_cmd->parsed()) {
        int32_t failures = 0;
        char* report = nullptr;
        kw_status st = kw_selfcheck(&failures, &report);
        if (st != KW_OK) {
            std::fprintf(stderr, "error: %s\n", kw_last_error());
            return 2;
        }
        std::fputs(report, stdout);
        kw_string_free(report);
        return failures == 0 ? 0 : 3;
    }
    if (run_cmd->parsed()) return run_command(run_args, KW_RUN_ALL);
    if (certify_cmd->parsed()) return run_command(certify_args, KW_RUN_CERTIFY);
    if (estimate_cmd->parsed()) return run_command(estimate_args, KW_RUN_ESTIMATE);
    return 1;
}
