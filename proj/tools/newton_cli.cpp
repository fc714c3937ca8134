#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "newton/newton.hpp"

using namespace newton;

namespace {

enum Exit { ok = 0, internal = 1, usage = 2, failed = 3, io = 4, input = 5, capacity = 6 };

const std::vector<std::string> kSuite = {"alexnet", "vgg-a",  "vgg-b",  "vgg-c",    "vgg-d",
                                         "msra-a",  "msra-b", "msra-c", "resnet-34"};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::vector<std::string> networks;
  std::string arch, baseline, format = "csv", out;
  bool suite = false;
  std::uint64_t seed = 42;
  std::vector<std::string> sets;
};

int report_error(const std::string& kind, const std::string& msg, int code) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["error"] = {{"kind", kind}, {"message", msg}, {"exit_code", code}};
  std::cerr << j.dump() << "\n";
  return code;
}

std::string data_dir() {
  if (const char* d = std::getenv("NEWTON_DATA_DIR")) return d;
  return NEWTON_DATA_DIR;
}

std::vector<NetworkDesc> networks(const Options& o) {
  std::vector<NetworkDesc> nets;
  if (o.suite) {
    for (const auto& n : kSuite) nets.push_back(load_network(data_dir() + "/networks/" + n + ".net"));
  }
  for (const auto& p : o.networks) nets.push_back(load_network(p));
  if (nets.empty()) throw UsageError("no networks given (use --network <file> or --suite)");
  return nets;
}

std::vector<SweepAxis> axes(const Options& o) {
  std::vector<SweepAxis> out;
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
      throw UsageError("--set expects key=v1,v2,... got '" + s + "'");
    }
    SweepAxis a;
    a.key = s.substr(0, eq);
    std::stringstream vs(s.substr(eq + 1));
    for (std::string v; std::getline(vs, v, ',');) {
      if (v.empty()) throw UsageError("--set " + a.key + " has an empty value");
      a.values.push_back(v);
    }
    out.push_back(std::move(a));
  }
  return out;
}

DesignPoint point(const std::string& path, const std::string& fallback, const Options& o,
                  bool apply_sets) {
  DesignPoint p = path.empty() ? preset(fallback) : load_arch(path);
  if (!apply_sets) return p;
  for (const auto& a : axes(o)) {
    if (a.values.size() != 1) {
      throw UsageError("--set " + a.key + " lists several values; use the sweep command");
    }
    apply_setting(p, a.key, a.values[0]);
  }
  p.validate();
  return p;
}

void emit(const std::string& text, const Options& o) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw IoError("cannot write '" + o.out + "'");
  f << text;
  if (!f) throw IoError("write to '" + o.out + "' failed");
}

int run(const std::string& cmd, const Options& o) {
  const auto fmt = parse_format(o.format);
  if (cmd == "verify") {
    VerifyOptions v;
    v.seed = o.seed;
    const auto rep = run_verification(v);
    emit(render(verify_report(rep), fmt), o);
    std::size_t bad = 0;
    for (const auto& s : rep.suites) bad += !s.passed();
    std::cerr << "verify: " << rep.suites.size() - bad << " suites passed, " << bad
              << " failed\n";
    if (bad) return report_error("verification", std::to_string(bad) + " suites failed", failed);
    return ok;
  }
  const auto nets = networks(o);
  if (cmd == "map") {
    const auto p = point(o.arch, "newton", o, true);
    Report all;
    all.kind = "map";
    for (const auto& n : nets) {
      auto r = map_report(n.name, plan_network(design_layers(n, p), map_options(p)));
      if (all.columns.empty()) all.columns = r.columns;
      all.extra["plans"].push_back(r.extra["plan"]);
      for (auto& row : r.rows) all.rows.push_back(std::move(row));
    }
    emit(render(all, fmt), o);
  } else if (cmd == "simulate") {
    emit(render(simulate_report(simulate_suite(nets, point(o.arch, "newton", o, true))), fmt), o);
  } else if (cmd == "compare") {
    const auto base = point(o.baseline, "isaac", o, false);
    const auto cand = point(o.arch, "newton", o, true);
    const auto cmp = compare(nets, base, cand);
    emit(render(compare_report(cmp, attribute(nets, base, cand)), fmt), o);
  } else if (cmd == "sweep") {
    const auto ax = axes(o);
    if (ax.empty()) throw UsageError("sweep needs at least one --set key=v1,v2,...");
    emit(render(sweep_report(sweep(nets, point(o.arch, "newton", o, false), ax)), fmt), o);
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crossbar accelerator model: verification, mapping and simulation"};
  app.require_subcommand(1, 1);
  Options o;

  auto add_common = [&](CLI::App* s, bool nets) {
    s->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    s->add_option("--out", o.out, "write the report here instead of stdout");
    s->add_option("--seed", o.seed, "seed for randomized suites");
    if (!nets) return;
    s->add_option("--network", o.networks, "network description file (repeatable)");
    s->add_flag("--suite", o.suite, "the nine shipped benchmark networks");
    s->add_option("--arch", o.arch, "arch config JSON (default: newton preset)");
    s->add_option("--set", o.sets, "override or sweep axis, key=v1,v2,... (repeatable)");
  };
  add_common(app.add_subcommand("verify", "run the functional equivalence suites"), false);
  add_common(app.add_subcommand("map", "emit the mapping plan"), true);
  add_common(app.add_subcommand("simulate", "emit performance reports"), true);
  auto* cmp = app.add_subcommand("compare", "baseline against candidate, with attribution");
  add_common(cmp, true);
  cmp->add_option("--baseline", o.baseline, "baseline arch config (default: isaac preset)");
  add_common(app.add_subcommand("sweep", "factorial sweep over --set axes"), true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), usage);
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run(cmd, o);
  } catch (const UsageError& e) {
    return report_error("usage", e.what(), usage);
  } catch (const IoError& e) {
    return report_error("io", e.what(), io);
  } catch (const ParseError& e) {
    return report_error("parse", e.what(), input);
  } catch (const ChainError& e) {
    return report_error("chain", e.what(), input);
  } catch (const ConfigError& e) {
    return report_error("config", e.what(), input);
  } catch (const CapacityError& e) {
    return report_error("capacity", e.what(), capacity);
  } catch (const VerificationError& e) {
    return report_error("verification", e.what(), failed);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), internal);
  }
}
