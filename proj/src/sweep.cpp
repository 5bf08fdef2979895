#include "flowdir/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "flowdir/errors.hpp"
#include "flowdir/format.hpp"

namespace flowdir {

const SweepRecord* SweepDataset::find(ConfigCode code) const {
  for (const auto& r : records) {
    if (r.code == code) return &r;
  }
  return nullptr;
}

SueParams config_params(const SueParams& base, ConfigCode code) {
  SueParams p = base;
  p.seed = mix64(base.seed, code);
  return p;
}

Evaluation evaluate_network(DirectedNetwork network, ConfigCode code, const DemandMatrix& demand,
                            const SueParams& params) {
  Evaluation eval;
  eval.code = code;
  eval.betweenness = edge_betweenness(network);
  eval.tbc = tbc(eval.betweenness);
  eval.assignment = sue_assign(network, demand, config_params(params, code));
  eval.network = std::move(network);
  return eval;
}

SweepRecord to_record(const Evaluation& eval, std::size_t link_count, bool emit_bc,
                      bool emit_flows) {
  SweepRecord rec;
  rec.code = eval.code;
  rec.trits = decode(eval.code, link_count).trits();
  rec.tbc = eval.tbc;
  rec.tltf = eval.assignment.tltf;
  rec.stt = eval.assignment.stt;
  rec.converged = eval.assignment.converged;
  rec.gap = eval.assignment.final_gap;
  const auto& arcs = eval.network.arcs();
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    if (emit_bc) rec.arc_bc.push_back({arcs[a].tail, arcs[a].head, eval.betweenness.per_arc[a]});
    if (emit_flows) rec.arc_flow.push_back({arcs[a].tail, arcs[a].head, eval.assignment.arc_flow[a]});
  }
  return rec;
}

std::string dataset_hash(std::span<const Link> links, const DemandMatrix& demand) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  auto feed_attrs = [&](const ArcAttributes& a) {
    for (double v : {a.capacity, a.free_flow_time, a.bpr_b, a.bpr_power, a.length}) {
      feed(format_double(v) + ",");
    }
  };
  for (const auto& link : links) {
    feed(std::to_string(link.a) + "-" + std::to_string(link.b) + ":");
    feed_attrs(link.forward);
    feed_attrs(link.backward);
  }
  for (const auto& [od, trips] : demand.entries()) {
    feed(std::to_string(od.first) + ">" + std::to_string(od.second) + "=" + format_double(trips) + ";");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

SweepDataset run_sweep(std::span<const Link> links, const DemandMatrix& demand,
                       const SueParams& params, const SweepOptions& options) {
  params.validate();
  const auto feasible = enumerate_feasible(links, demand, options.enumeration);
  const auto& codes = feasible.codes;

  SweepDataset ds;
  ds.provenance.dataset_hash = dataset_hash(links, demand);
  ds.provenance.params = params;
  ds.provenance.nodes = link_nodes(links);
  ds.provenance.link_count = links.size();
  ds.provenance.contraflow_capacity_merge = options.enumeration.view.contraflow_capacity_merge;
  ds.provenance.timestamp = utc_timestamp();
  ds.records.resize(codes.size());

  unsigned workers = options.workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                          : options.workers;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(codes.size(), 1)));

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex error_mutex;
  std::optional<std::size_t> failed_index;
  std::string failure;

  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < codes.size(); i = next.fetch_add(1)) {
      const auto code = codes[i];
      try {
        auto network = directed_view(links, decode(code, links.size()),
                                     options.enumeration.view, options.enumeration.extra_arcs);
        auto eval = evaluate_network(std::move(network), code, demand, params);
        ds.records[i] = to_record(eval, links.size(), options.emit_bc, options.emit_flows);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (!failed_index || i < *failed_index) {
          failed_index = i;
          failure = e.what();
        }
      }
      done.fetch_add(1, std::memory_order_relaxed);
    }
  };

  std::atomic<bool> finished{false};
  std::thread reporter;
  if (options.progress || options.on_progress) {
    reporter = std::thread([&] {
      const auto start = std::chrono::steady_clock::now();
      while (!finished.load()) {
        for (int tick = 0; tick < 20 && !finished.load(); ++tick) {
          std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
        const auto n = done.load();
        if (options.on_progress) options.on_progress(n, codes.size());
        if (options.progress) {
          const double secs =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          std::fprintf(stderr, "sweep: %zu/%zu configs, %.0f configs/s\n", n, codes.size(),
                       secs > 0 ? static_cast<double>(n) / secs : 0.0);
        }
      }
    });
  }

  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  finished.store(true);
  if (reporter.joinable()) reporter.join();

  if (failed_index) {
    throw ComputeError("assignment failed for configuration " +
                       std::to_string(codes[*failed_index]) + ": " + failure);
  }
  return ds;
}

SweepDataset rank_by_stt(SweepDataset ds) {
  auto& r = ds.records;
  // Worst first: higher STT, then larger code, receives the lower rank.
  std::sort(r.begin(), r.end(), [](const SweepRecord& x, const SweepRecord& y) {
    if (x.stt != y.stt) return x.stt > y.stt;
    return x.code > y.code;
  });
  for (std::size_t i = 0; i < r.size(); ++i) r[i].rank = static_cast<int>(i + 1);
  std::reverse(r.begin(), r.end());
  return ds;
}

namespace {

std::string join_nodes(const std::vector<NodeId>& nodes) {
  std::string out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(nodes[i]);
  }
  return out;
}

std::string format_arc_values(const std::vector<ArcValue>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(values[i].tail) + ">" + std::to_string(values[i].head) + "=" +
           format_double(values[i].value);
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
T parse_field(const std::string& text, const std::string& column, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(line, "bad value '" + text + "' in column '" + column + "'");
  }
  return value;
}

bool parse_bool(const std::string& text, const std::string& column, std::size_t line) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ParseError(line, "bad boolean '" + text + "' in column '" + column + "'");
}

std::vector<ArcValue> parse_arc_values(const std::string& text, std::size_t line) {
  std::vector<ArcValue> out;
  if (text.empty()) return out;
  for (const auto& item : split(text, ';')) {
    const auto gt = item.find('>');
    const auto eq = item.find('=');
    if (gt == std::string::npos || eq == std::string::npos || eq < gt) {
      throw ParseError(line, "bad arc value '" + item + "'");
    }
    out.push_back({parse_field<NodeId>(item.substr(0, gt), "arc", line),
                   parse_field<NodeId>(item.substr(gt + 1, eq - gt - 1), "arc", line),
                   parse_field<double>(item.substr(eq + 1), "arc", line)});
  }
  return out;
}

}  // namespace

void write_csv(std::ostream& out, const SweepDataset& ds) {
  const auto& p = ds.provenance;
  out << "# flowdir sweep dataset\n";
  out << "# dataset_hash: " << p.dataset_hash << '\n';
  out << "# nodes: " << join_nodes(p.nodes) << '\n';
  out << "# link_count: " << p.link_count << '\n';
  out << "# sigma: " << format_double(p.params.sigma) << '\n';
  out << "# max_iterations: " << p.params.max_iterations << '\n';
  out << "# gap_tolerance: " << format_double(p.params.gap_tolerance) << '\n';
  out << "# seed: " << p.params.seed << '\n';
  out << "# contraflow_capacity_merge: " << (p.contraflow_capacity_merge ? "true" : "false") << '\n';
  out << "# timestamp: " << p.timestamp << '\n';

  const bool has_bc = std::any_of(ds.records.begin(), ds.records.end(),
                                  [](const auto& r) { return !r.arc_bc.empty(); });
  const bool has_flows = std::any_of(ds.records.begin(), ds.records.end(),
                                     [](const auto& r) { return !r.arc_flow.empty(); });
  for (std::size_t i = 0; i < std::size(kCsvColumns); ++i) out << (i ? "," : "") << kCsvColumns[i];
  if (has_bc) out << ",bc";
  if (has_flows) out << ",flows";
  out << '\n';

  for (const auto& r : ds.records) {
    out << r.code << ',' << r.trits << ",true," << format_double(r.tbc) << ','
        << format_double(r.tltf) << ',' << format_double(r.stt) << ','
        << (r.converged ? "true" : "false") << ',' << format_double(r.gap) << ',' << r.rank;
    if (has_bc) out << ',' << format_arc_values(r.arc_bc);
    if (has_flows) out << ',' << format_arc_values(r.arc_flow);
    out << '\n';
  }
}

SweepDataset read_csv(std::istream& in) {
  SweepDataset ds;
  std::map<std::string, std::string> meta;
  std::map<std::string, std::size_t> column;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        auto key = line.substr(1, colon - 1);
        auto value = line.substr(colon + 1);
        key.erase(0, key.find_first_not_of(' '));
        value.erase(0, value.find_first_not_of(' '));
        meta[key] = value;
      }
      continue;
    }
    if (column.empty()) {
      const auto names = split(line, ',');
      for (std::size_t i = 0; i < names.size(); ++i) column[names[i]] = i;
      for (const char* required : kCsvColumns) {
        if (!column.count(required)) {
          throw DataError(std::string("sweep CSV schema mismatch: missing column '") + required + "'");
        }
      }
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != column.size()) {
      throw ParseError(line_no, "expected " + std::to_string(column.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    auto get = [&](const char* name) -> const std::string& { return fields[column.at(name)]; };
    SweepRecord r;
    r.code = parse_field<ConfigCode>(get("code"), "code", line_no);
    r.trits = get("trits");
    if (!parse_bool(get("feasible"), "feasible", line_no)) {
      throw ParseError(line_no, "sweep datasets hold feasible configurations only");
    }
    r.tbc = parse_field<double>(get("tbc"), "tbc", line_no);
    r.tltf = parse_field<double>(get("tltf"), "tltf", line_no);
    r.stt = parse_field<double>(get("stt"), "stt", line_no);
    r.converged = parse_bool(get("converged"), "converged", line_no);
    r.gap = parse_field<double>(get("gap"), "gap", line_no);
    r.rank = parse_field<int>(get("rank"), "rank", line_no);
    if (column.count("bc")) r.arc_bc = parse_arc_values(get("bc"), line_no);
    if (column.count("flows")) r.arc_flow = parse_arc_values(get("flows"), line_no);
    ds.records.push_back(std::move(r));
  }
  if (column.empty()) throw DataError("sweep CSV schema mismatch: no header row");

  auto& p = ds.provenance;
  auto meta_value = [&](const std::string& key) -> std::optional<std::string> {
    auto it = meta.find(key);
    if (it == meta.end()) return std::nullopt;
    return it->second;
  };
  if (auto v = meta_value("dataset_hash")) p.dataset_hash = *v;
  if (auto v = meta_value("nodes"); v && !v->empty()) {
    for (const auto& id : split(*v, ',')) p.nodes.push_back(parse_field<NodeId>(id, "nodes", 0));
  }
  if (auto v = meta_value("link_count")) p.link_count = parse_field<std::size_t>(*v, "link_count", 0);
  if (auto v = meta_value("sigma")) p.params.sigma = parse_field<double>(*v, "sigma", 0);
  if (auto v = meta_value("max_iterations")) {
    p.params.max_iterations = parse_field<int>(*v, "max_iterations", 0);
  }
  if (auto v = meta_value("gap_tolerance")) {
    p.params.gap_tolerance = parse_field<double>(*v, "gap_tolerance", 0);
  }
  if (auto v = meta_value("seed")) p.params.seed = parse_field<std::uint64_t>(*v, "seed", 0);
  if (auto v = meta_value("contraflow_capacity_merge")) p.contraflow_capacity_merge = *v == "true";
  if (auto v = meta_value("timestamp")) p.timestamp = *v;
  return ds;
}

void save_csv(const SweepDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_csv(out, ds);
  if (!out) throw DataError("write failed for " + path.string());
}

SweepDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_csv(in);
}

}  // namespace flowdir
