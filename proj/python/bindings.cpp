#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

#include "hintscope/analytics.hpp"
#include "hintscope/browser_emulator.hpp"
#include "hintscope/filter_list.hpp"
#include "hintscope/login_discovery.hpp"
#include "hintscope/public_suffix.hpp"
#include "hintscope/record_io.hpp"
#include "hintscope/registry.hpp"
#include "hintscope/report.hpp"
#include "hintscope/stats.hpp"
#include "hintscope/text.hpp"

namespace py = pybind11;
using namespace hintscope;

namespace {

py::dict parsed_to_dict(const ParsedAcceptCh& p, const HintRegistry& reg) {
  py::dict d;
  d["recognized"] = reg.names(p.recognized);
  d["unrecognized"] = p.unrecognized;
  return d;
}

py::dict stat_to_dict(const StatResult& r) {
  py::dict d;
  d["label"] = r.label;
  d["groups"] = r.groups;
  d["chi2"] = r.chi2;
  d["dof"] = r.dof;
  d["p"] = r.p;
  d["p_adjusted"] = r.p_adjusted ? py::cast(*r.p_adjusted) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_hintscope, m) {
  m.doc() = "Client hints measurement toolkit";

  py::register_exception<StatsError>(m, "StatsError", PyExc_ValueError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);

  m.def("hints", [] {
    const auto& reg = HintRegistry::builtin();
    py::list out;
    for (const auto& d : reg.descriptors()) {
      py::dict h;
      h["header"] = d.header_name;
      h["name"] = d.friendly_name;
      h["group"] = std::string(to_string(d.group));
      h["level"] = std::string(to_string(d.level));
      h["status"] = std::string(to_string(d.status));
      out.append(h);
    }
    return out;
  });

  m.def(
      "parse_accept_ch",
      [](const std::string& value) {
        const auto& reg = HintRegistry::builtin();
        return parsed_to_dict(reg.parse_accept_ch(value), reg);
      },
      py::arg("value"));

  m.def(
      "max_level",
      [](const std::string& value) -> std::optional<std::string> {
        const auto& reg = HintRegistry::builtin();
        auto level = reg.max_level(reg.parse_accept_ch(value).recognized);
        if (!level) return std::nullopt;
        return std::string(to_string(*level));
      },
      py::arg("accept_ch"), "Highest level of detail among the recognized hints.");

  m.def("suggest_hint_name",
        [](const std::string& token) { return suggest_hint_name(token, HintRegistry::builtin()); });

  m.def("profiles", [] { return ProfileCatalog::builtin().names(); });

  m.def(
      "emulate",
      [](const std::string& profile, const std::string& accept_ch, const std::string& origin) {
        const auto* p = ProfileCatalog::builtin().find(profile);
        if (!p) throw py::key_error("unknown profile: " + profile);
        const auto& reg = HintRegistry::builtin();
        auto cache = receive_accept_ch(*p, GrantCache{}, origin, reg.parse_accept_ch(accept_ch));
        auto headers = request_headers(*p, cache, origin, reg);
        return std::map<std::string, std::string>(headers.begin(), headers.end());
      },
      py::arg("profile"), py::arg("accept_ch") = "", py::arg("origin") = "https://example.com");

  m.def(
      "registrable_domain",
      [](const std::string& host) { return PublicSuffixList::builtin().try_registrable_domain(host); },
      py::arg("host"));

  m.def(
      "is_tracker",
      [](const std::string& url, const std::string& filter_list) {
        auto set = FilterSet::from_text(filter_list);
        return set.match(to_lower(url)).is_tracker;
      },
      py::arg("url"), py::arg("filter_list"));

  m.def(
      "score_login_candidate",
      [](const std::string& url, const std::string& text) {
        LoginCandidate c;
        c.url = url;
        c.text = text;
        return score_candidate(c, IndicatorSet::builtin());
      },
      py::arg("url"), py::arg("text") = "");

  m.def("chi_squared_sf", &chi_squared_sf, py::arg("chi2"), py::arg("dof"));
  m.def(
      "chi_squared", [](const ContingencyTable& t) { return stat_to_dict(chi_squared(t)); }, py::arg("table"));
  m.def(
      "bonferroni", [](const std::vector<double>& ps, std::size_t m) { return bonferroni(ps, m); },
      py::arg("p_values"), py::arg("m"));
  m.def("format_p", &format_p);

  m.def(
      "analyze",
      [](const std::vector<std::string>& record_files, std::optional<std::string> out_dir) {
        std::vector<CrawlRecord> records;
        for (const auto& f : record_files) {
          auto part = read_records_file(f);
          records.insert(records.end(), part.begin(), part.end());
        }
        py::gil_scoped_release release;
        auto report = analyze(records);
        if (out_dir) write_report(report, *out_dir);
        auto files = render_report(report);
        return files;
      },
      py::arg("record_files"), py::arg("out_dir") = py::none(),
      "Analyzes crawl record files and returns the rendered report tables by file name.");
}
