#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "oppsched/harness.hpp"

namespace py = pybind11;
using namespace oppsched;

namespace {

std::vector<std::string> set_ids(const Plan& plan, PartSet s) { return plan.ids_of(s); }

PartSet ids_to_set(const Plan& plan, const std::vector<std::string>& ids) {
    return plan.set_of(ids);
}

py::dict row_to_dict(const Plan& plan, const TraceRow& row) {
    auto ids = [&](const std::vector<PartIndex>& parts) {
        py::list out;
        for (PartIndex p : parts) out.append(plan.id(p));
        return out;
    };
    py::dict d;
    d["visible"] = ids(row.visible);
    d["buffered"] = ids(row.buffered);
    d["installed"] = ids(row.installed);
    d["action"] = row.action ? py::object(py::str(row.action->to_string(plan)))
                             : py::object(py::none());
    return d;
}

py::list trace_to_list(const Plan& plan, const Trace& trace) {
    py::list out;
    for (const TraceRow& row : trace) out.append(row_to_dict(plan, row));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Least-commitment assembly plans and opportunistic execution-time scheduling";

    py::register_exception<Error>(m, "OppschedError", PyExc_ValueError);

    py::class_<Plan>(m, "Plan")
        .def_static("parse", [](const std::string& text) { return parse_plan(text); },
                    py::arg("text"), "Parse and validate a plan file; edges are reduced.")
        .def_property_readonly("part_count", &Plan::part_count)
        .def("part_ids",
             [](const Plan& p) { return set_ids(p, p.all_parts()); })
        .def("display_name",
             [](const Plan& p, const std::string& id) { return p.display_name(p.require(id)); },
             py::arg("id"))
        .def("edges",
             [](const Plan& p) {
                 std::vector<std::pair<std::string, std::string>> out;
                 for (const Edge& e : p.edges()) out.emplace_back(p.id(e.pred), p.id(e.succ));
                 return out;
             })
        .def("is_reduced", &Plan::is_reduced)
        .def("__repr__", [](const Plan& p) {
            return "Plan(" + std::to_string(p.part_count()) + " parts, " +
                   std::to_string(p.edges().size()) + " edges)";
        });

    m.def("parse_plan", [](const std::string& text) { return parse_plan(text); }, py::arg("text"));
    m.def("transitive_reduction", &transitive_reduction, py::arg("plan"));
    m.def("validate_plan_text",
          [](const std::string& text) {
              py::list out;
              for (const Diagnostic& d : validate_plan_text(text)) {
                  py::dict item;
                  item["severity"] =
                      d.severity == Diagnostic::Severity::error ? "error" : "warning";
                  item["line"] = d.line;
                  item["message"] = d.message;
                  out.append(item);
              }
              return out;
          },
          py::arg("text"));

    m.def("ready_set",
          [](const Plan& plan, const std::vector<std::string>& installed) {
              return set_ids(plan, ready_set(plan, ids_to_set(plan, installed)));
          },
          py::arg("plan"), py::arg("installed") = std::vector<std::string>{});
    m.def("is_admissible",
          [](const Plan& plan, const std::vector<std::string>& sequence) {
              return is_admissible(plan, sequence);
          },
          py::arg("plan"), py::arg("sequence"));
    m.def("count_completions",
          [](const Plan& plan, const std::vector<std::string>& installed) {
              return count_completions(plan, ids_to_set(plan, installed));
          },
          py::arg("plan"), py::arg("installed") = std::vector<std::string>{});
    m.def("count_completions_bruteforce",
          [](const Plan& plan, const std::vector<std::string>& installed) {
              return count_completions_bruteforce(plan, ids_to_set(plan, installed));
          },
          py::arg("plan"), py::arg("installed") = std::vector<std::string>{});
    m.def("uninstalled_ancestor_count",
          [](const Plan& plan, const std::vector<std::string>& installed,
             const std::string& part) {
              return uninstalled_ancestor_count(plan, ids_to_set(plan, installed),
                                                std::string_view(part));
          },
          py::arg("plan"), py::arg("installed"), py::arg("part"));

    py::class_<Policy>(m, "Policy")
        .def_static("opportunistic", &Policy::opportunistic)
        .def_static("layout_all",
                    [](const Plan& plan, const std::vector<std::string>& order) {
                        return Policy::layout_all(plan, order);
                    },
                    py::arg("plan"), py::arg("fixed_order"))
        .def_static("shake_fixed",
                    [](const Plan& plan, const std::vector<std::string>& order) {
                        return Policy::shake_fixed(plan, order);
                    },
                    py::arg("plan"), py::arg("fixed_order"))
        .def_static("buffer_fixed",
                    [](const Plan& plan, const std::vector<std::string>& order) {
                        return Policy::buffer_fixed(plan, order);
                    },
                    py::arg("plan"), py::arg("fixed_order"))
        .def_static("from_name",
                    [](const Plan& plan, const std::string& name,
                       const std::vector<std::string>& order) {
                        return Policy::from_name(plan, name, order);
                    },
                    py::arg("plan"), py::arg("name"),
                    py::arg("fixed_order") = std::vector<std::string>{})
        .def_property_readonly("name", [](const Policy& p) { return std::string(p.name()); });

    py::class_<TrialStats>(m, "TrialStats")
        .def_readonly("installs_from_bin", &TrialStats::installs_from_bin)
        .def_readonly("installs_from_layout", &TrialStats::installs_from_layout)
        .def_readonly("buffers", &TrialStats::buffers)
        .def_readonly("shakes", &TrialStats::shakes)
        .def_readonly("motions", &TrialStats::motions)
        .def_readonly("peak_buffer", &TrialStats::peak_buffer)
        .def_readonly("steps", &TrialStats::steps)
        .def_readonly("censored", &TrialStats::censored)
        .def("__repr__", [](const TrialStats& s) { return format_stats(s); });

    py::class_<MetricSummary>(m, "MetricSummary")
        .def_readonly("mean", &MetricSummary::mean)
        .def_readonly("stddev", &MetricSummary::stddev)
        .def_readonly("min", &MetricSummary::min)
        .def_readonly("max", &MetricSummary::max);

    py::class_<BatchSummary>(m, "BatchSummary")
        .def_readonly("policy_name", &BatchSummary::policy_name)
        .def_readonly("trials", &BatchSummary::trials)
        .def_readonly("motions", &BatchSummary::motions)
        .def_readonly("shakes", &BatchSummary::shakes)
        .def_readonly("peak_buffer_mean", &BatchSummary::peak_buffer_mean)
        .def_readonly("censored", &BatchSummary::censored)
        .def_readonly("seed", &BatchSummary::seed)
        .def_readonly("window", &BatchSummary::window)
        .def_readonly("shake_cost", &BatchSummary::shake_cost)
        .def_readonly("cost_mean", &BatchSummary::cost_mean);

    m.def("run_trial",
          [](const Plan& plan, const Policy& policy, int window, std::uint64_t seed,
             int max_steps) {
              auto [trace, stats] = run_trial(plan, policy, window, seed, {max_steps});
              return py::make_tuple(trace_to_list(plan, trace), stats);
          },
          py::arg("plan"), py::arg("policy"), py::arg("window") = 2, py::arg("seed") = 0,
          py::arg("max_steps") = 10000);
    m.def("replay_scripted",
          [](const Plan& plan, const Policy& policy,
             const std::vector<std::vector<std::string>>& script) {
              auto [trace, stats] = replay_scripted(plan, policy, script);
              return py::make_tuple(trace_to_list(plan, trace), stats);
          },
          py::arg("plan"), py::arg("policy"), py::arg("script"));
    m.def("run_batch",
          [](const Plan& plan, const Policy& policy, int window, int trials, std::uint64_t seed,
             int threads, double shake_cost) {
              return run_batch(plan, policy, window, trials, seed, threads, {}, shake_cost);
          },
          py::arg("plan"), py::arg("policy"), py::arg("window") = 2, py::arg("trials") = 1000,
          py::arg("seed") = 0, py::arg("threads") = 1, py::arg("shake_cost") = 1.0,
          py::call_guard<py::gil_scoped_release>());
    m.def("export_summary",
          [](const std::vector<BatchSummary>& summaries, const std::string& plan_name) {
              return export_summary(summaries, plan_name);
          },
          py::arg("summaries"), py::arg("plan_name") = "plan");
    m.def("parse_script", [](const std::string& text) { return parse_script(text); },
          py::arg("text"));
}
