// Command line front end: validate, count, simulate, replay, trace.
#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "oppsched/harness.hpp"

namespace {

using namespace oppsched;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split_ids(const std::string& list) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        std::size_t comma = list.find(',', start);
        std::string token = (comma == std::string::npos) ? list.substr(start)
                                                         : list.substr(start, comma - start);
        while (!token.empty() && std::isspace(static_cast<unsigned char>(token.front())))
            token.erase(token.begin());
        while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back())))
            token.pop_back();
        if (!token.empty()) {
            out.push_back(std::move(token));
        } else if (comma != std::string::npos || !list.empty()) {
            throw Error("empty part id in list '" + list + "'");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string plan_stem(const std::string& path) {
    std::size_t slash = path.find_last_of("/\\");
    std::string name = (slash == std::string::npos) ? path : path.substr(slash + 1);
    std::size_t dot = name.find_last_of('.');
    if (dot != std::string::npos && dot > 0) name.resize(dot);
    return name;
}

// The reference install order of the shipped gearbox plan; other plans need
// an explicit --fixed-order for the fixed-order policies.
const std::string kDefaultFixedOrder = "ca,ba,ri,dr,sm,m1,ra,co,st,cl";

struct Options {
    std::string plan_path;
    std::string policy = "opportunistic";
    std::vector<std::string> policies;  // simulate may compare several
    std::string installed;
    std::string fixed_order = kDefaultFixedOrder;
    std::string script_path;
    std::string out_path;
    int trials = 1000;
    int window = 2;
    std::uint64_t seed = 0;
};

Policy make_policy(const Plan& plan, const std::string& name, const std::string& fixed_order) {
    return Policy::from_name(plan, name, split_ids(fixed_order));
}

int run_validate(const Options& opt) {
    std::vector<Diagnostic> diags = validate_plan_text(read_file(opt.plan_path));
    bool has_error = false;
    for (const Diagnostic& d : diags) {
        has_error |= d.severity == Diagnostic::Severity::error;
        std::cout << (d.severity == Diagnostic::Severity::error ? "error" : "warning");
        if (d.line > 0) std::cout << " (line " << d.line << ")";
        std::cout << ": " << d.message << "\n";
    }
    if (diags.empty()) std::cout << "ok\n";
    return has_error ? 1 : 0;
}

int run_count(const Options& opt) {
    Plan plan = parse_plan(read_file(opt.plan_path));
    PartSet installed = plan.set_of(split_ids(opt.installed));
    std::cout << count_completions(plan, installed) << "\n";
    return 0;
}

int run_simulate(const Options& opt) {
    Plan plan = parse_plan(read_file(opt.plan_path));
    const int threads = std::clamp<int>(std::thread::hardware_concurrency(), 1, 8);
    std::vector<BatchSummary> summaries;
    std::vector<std::string> names = opt.policies.empty()
                                         ? std::vector<std::string>{opt.policy}
                                         : opt.policies;
    for (const std::string& name : names) {
        Policy policy = make_policy(plan, name, opt.fixed_order);
        summaries.push_back(run_batch(plan, policy, opt.window, opt.trials, opt.seed, threads));
    }
    std::string json = export_summary(summaries, plan_stem(opt.plan_path));
    std::cout << json;
    if (!opt.out_path.empty()) {
        std::ofstream out(opt.out_path, std::ios::binary);
        if (!out) throw Error("cannot write file: " + opt.out_path);
        out << json;
    }
    return 0;
}

int run_replay(const Options& opt) {
    Plan plan = parse_plan(read_file(opt.plan_path));
    Policy policy = make_policy(plan, opt.policy, opt.fixed_order);
    auto script = parse_script(read_file(opt.script_path));
    auto [trace, stats] = replay_scripted(plan, policy, script);
    std::cout << format_trace(plan, trace) << format_stats(stats) << "\n";
    return 0;
}

int run_trace(const Options& opt) {
    Plan plan = parse_plan(read_file(opt.plan_path));
    Policy policy = make_policy(plan, opt.policy, opt.fixed_order);
    auto [trace, stats] = run_trial(plan, policy, opt.window, opt.seed);
    std::cout << format_trace(plan, trace);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Least-commitment assembly plans with opportunistic execution-time scheduling"};
    app.require_subcommand(1);

    Options opt;
    auto add_plan = [&](CLI::App* cmd) {
        cmd->add_option("--plan", opt.plan_path, "Plan file")->required();
    };
    auto add_fixed_order = [&](CLI::App* cmd) {
        cmd->add_option("--fixed-order", opt.fixed_order,
                        "Comma-separated full install order for the fixed-order policies");
    };

    CLI::App* validate = app.add_subcommand("validate", "Check a plan file and print diagnostics");
    add_plan(validate);

    CLI::App* count = app.add_subcommand("count", "Count the remaining admissible sequences");
    add_plan(count);
    count->add_option("--installed", opt.installed, "Comma-separated already-installed parts");

    CLI::App* simulate = app.add_subcommand("simulate", "Run seeded Monte Carlo batches");
    add_plan(simulate);
    simulate->add_option("--policy", opt.policies,
                         "Policy to simulate (repeatable): opportunistic, layout_all, "
                         "shake_fixed, buffer_fixed");
    add_fixed_order(simulate);
    simulate->add_option("--trials", opt.trials, "Trials per policy");
    simulate->add_option("--seed", opt.seed, "Batch seed");
    simulate->add_option("--window", opt.window, "Visibility window");
    simulate->add_option("--out", opt.out_path, "Also write the summary JSON to this file");

    CLI::App* replay = app.add_subcommand("replay", "Replay a scripted visibility sequence");
    add_plan(replay);
    replay->add_option("--policy", opt.policy, "Policy to drive the replay");
    add_fixed_order(replay);
    replay->add_option("--script", opt.script_path, "Script file of observations")->required();

    CLI::App* trace = app.add_subcommand("trace", "Print the trace of one simulated trial");
    add_plan(trace);
    trace->add_option("--policy", opt.policy, "Policy to drive the trial");
    add_fixed_order(trace);
    trace->add_option("--seed", opt.seed, "Trial seed");
    trace->add_option("--window", opt.window, "Visibility window");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (validate->parsed()) return run_validate(opt);
        if (count->parsed()) return run_count(opt);
        if (simulate->parsed()) return run_simulate(opt);
        if (replay->parsed()) return run_replay(opt);
        if (trace->parsed()) return run_trace(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
