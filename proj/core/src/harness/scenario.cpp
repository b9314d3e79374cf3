#include "rtrx/harness/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace rtrx::harness {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) tokens.push_back(tok);
  return tokens;
}

struct Parser {
  std::istringstream in;
  std::string file;
  int line_no = 0;

  Parser(const std::string& text, std::string filename)
      : in(text), file(std::move(filename)) {}

  [[noreturn]] void fail(int line, const std::string& what) {
    throw ScenarioError(file, line, what);
  }

  void parse_into(ConfigNode& node, bool top_level) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_no;
      auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      std::vector<std::string> tokens = tokenize(raw);
      if (tokens.empty()) continue;
      if (tokens.size() == 1 && tokens[0] == "}") {
        if (top_level) fail(line_no, "unmatched '}'");
        return;
      }
      if (tokens.back() == "{") {
        if (tokens.size() < 2 || tokens.size() > 3) {
          fail(line_no, "section header must be 'kind [name] {'");
        }
        ConfigNode child;
        child.kind = tokens[0];
        if (tokens.size() == 3) child.name = tokens[1];
        child.line = line_no;
        parse_into(child, false);
        node.children.push_back(std::move(child));
        continue;
      }
      if (tokens.size() < 2) fail(line_no, "expected 'key value'");
      std::string value = tokens[1];
      for (std::size_t i = 2; i < tokens.size(); ++i) value += " " + tokens[i];
      node.entries.push_back(ConfigNode::KV{tokens[0], value, line_no});
    }
    if (!top_level) fail(line_no, "missing closing '}'");
  }
};

// Typed access to one section.
struct Section {
  const ConfigNode& node;
  const std::string& file;

  [[noreturn]] void fail(int line, const std::string& what) const {
    throw ScenarioError(file, line, what);
  }

  const ConfigNode::KV* find(const std::string& key) const {
    for (const auto& kv : node.entries) {
      if (kv.key == key) return &kv;
    }
    return nullptr;
  }

  bool has(const std::string& key) const { return find(key) != nullptr; }

  std::string str(const std::string& key, const std::string& dflt = "") const {
    const auto* kv = find(key);
    return kv ? kv->value : dflt;
  }

  std::string require_str(const std::string& key) const {
    const auto* kv = find(key);
    if (!kv) fail(node.line, node.kind + " section: missing '" + key + "'");
    return kv->value;
  }

  double number(const std::string& key, double dflt) const {
    const auto* kv = find(key);
    if (!kv) return dflt;
    try {
      std::size_t pos = 0;
      double v = std::stod(kv->value, &pos);
      if (pos != kv->value.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      fail(kv->line, "'" + key + "': not a number: " + kv->value);
    }
  }

  double require_number(const std::string& key) const {
    if (!has(key)) fail(node.line, node.kind + " section: missing '" + key + "'");
    return number(key, 0.0);
  }

  std::int64_t integer(const std::string& key, std::int64_t dflt) const {
    const auto* kv = find(key);
    if (!kv) return dflt;
    try {
      std::size_t pos = 0;
      std::int64_t v = std::stoll(kv->value, &pos);
      if (pos != kv->value.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      fail(kv->line, "'" + key + "': not an integer: " + kv->value);
    }
  }

  bool flag(const std::string& key, bool dflt) const {
    const auto* kv = find(key);
    if (!kv) return dflt;
    if (kv->value == "on" || kv->value == "true") return true;
    if (kv->value == "off" || kv->value == "false") return false;
    fail(kv->line, "'" + key + "': expected on/off");
  }

  // Duration given as <stem>_us / <stem>_ms / <stem>_s.
  std::optional<SimDuration> duration(const std::string& stem) const {
    const auto* kv = find(stem + "_us");
    double scale = 1e3;
    if (!kv) {
      kv = find(stem + "_ms");
      scale = 1e6;
    }
    if (!kv) {
      kv = find(stem + "_s");
      scale = 1e9;
    }
    if (!kv) return std::nullopt;
    try {
      return static_cast<SimDuration>(std::llround(std::stod(kv->value) * scale));
    } catch (const std::exception&) {
      fail(kv->line, "'" + kv->key + "': not a number: " + kv->value);
    }
  }

  SimDuration duration_or(const std::string& stem, SimDuration dflt) const {
    auto d = duration(stem);
    return d.has_value() ? *d : dflt;
  }

  const ConfigNode* child(const std::string& kind) const {
    for (const ConfigNode& c : node.children) {
      if (c.kind == kind) return &c;
    }
    return nullptr;
  }
};

}  // namespace

ConfigNode parse_config(const std::string& text, const std::string& filename) {
  Parser p(text, filename);
  ConfigNode root;
  root.kind = filename;
  p.parse_into(root, true);
  return root;
}

ConfigNode parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path, 0, "cannot open scenario file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void set_by_path(ConfigNode& root, const std::string& path,
                 const std::string& value) {
  std::vector<std::string> segs;
  std::string cur;
  for (char c : path) {
    if (c == '.') {
      segs.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  segs.push_back(cur);
  if (segs.empty()) throw ScenarioError(root.kind, 0, "empty parameter path");

  ConfigNode* node = &root;
  for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
    ConfigNode* next = nullptr;
    for (ConfigNode& c : node->children) {
      if (c.label() == segs[i]) {
        next = &c;
        break;
      }
    }
    if (!next) {
      throw ScenarioError(root.kind, 0,
                          "unknown parameter path segment '" + segs[i] + "' in " + path);
    }
    node = next;
  }
  const std::string& key = segs.back();
  for (auto& kv : node->entries) {
    if (kv.key == key) {
      kv.value = value;
      return;
    }
  }
  node->entries.push_back(ConfigNode::KV{key, value, node->line});
}

flows::DefaultAction Scenario::unmatched_action() const {
  if (unmatched.has_value()) return *unmatched;
  // The software design carries unmatched packets as a background flow and
  // drops them only after stack processing; the NIC designs drop them
  // before any interrupt.
  switch (mode) {
    case rxstack::PipelineMode::hardware:
    case rxstack::PipelineMode::unified:
      return flows::DefaultAction::drop;
    default:
      return flows::DefaultAction::background_flow;
  }
}

const QueueDecl* Scenario::find_queue(const std::string& name) const {
  for (const QueueDecl& q : queues) {
    if (q.name == name) return &q;
  }
  return nullptr;
}

const FlowDecl* Scenario::find_flow(const std::string& name) const {
  for (const FlowDecl& f : flows) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

namespace {

void build_costs(const Section& s, rxstack::CostModel& c) {
  auto us = [&](const char* key, SimDuration dflt) {
    return s.has(key) ? duration_us(s.require_number(key)) : dflt;
  };
  c.isr_classify = us("isr_classify_us", c.isr_classify);
  c.isr_eager_full = us("isr_eager_full_us", c.isr_eager_full);
  c.shortcircuit = us("shortcircuit_us", c.shortcircuit);
  c.prio_raise = us("prio_raise_us", c.prio_raise);
  c.recycle = us("recycle_us", c.recycle);
  c.deferred_driver = us("deferred_driver_us", c.deferred_driver);
  c.stack = us("stack_us", c.stack);
  c.deliver = us("deliver_us", c.deliver);
  c.isr_enqueue = us("isr_enqueue_us", c.isr_enqueue);
  c.poll_packet = us("poll_packet_us", c.poll_packet);
  c.irq_overhead = us("irq_overhead_us", c.irq_overhead);
}

flows::Protocol parse_proto(const Section& s, const std::string& key,
                            flows::Protocol dflt) {
  if (!s.has(key)) return dflt;
  const auto* kv = s.find(key);
  auto p = flows::protocol_from_string(kv->value);
  if (!p.has_value()) s.fail(kv->line, "unknown protocol '" + kv->value + "'");
  return *p;
}

}  // namespace

Scenario build_scenario(const ConfigNode& root) {
  Scenario sc;
  sc.file = root.kind;
  Section top{root, sc.file};

  {
    const auto* kv = top.find("pipeline");
    if (!kv) top.fail(1, "missing 'pipeline' mode");
    auto mode = rxstack::pipeline_mode_from_string(kv->value);
    if (!mode.has_value()) top.fail(kv->line, "unknown pipeline mode '" + kv->value + "'");
    sc.mode = *mode;
  }
  sc.duration = top.duration_or("duration", kSec);
  if (sc.duration <= 0) top.fail(root.line, "duration must be positive");
  sc.seed = static_cast<std::uint64_t>(top.integer("seed", 1));
  sc.priority_floor = static_cast<int>(top.integer("priority_floor", 0));

  for (const ConfigNode& child : root.children) {
    Section s{child, sc.file};
    if (child.kind == "costs") {
      build_costs(s, sc.costs);
    } else if (child.kind == "nic") {
      sc.ring_capacity = static_cast<int>(s.integer("ring_capacity", sc.ring_capacity));
      if (sc.ring_capacity < 1) s.fail(child.line, "ring_capacity must be >= 1");
      sc.recycle_threshold = s.number("recycle_threshold", sc.recycle_threshold);
      if (s.has("unmatched")) {
        std::string v = s.str("unmatched");
        if (v == "background") sc.unmatched = flows::DefaultAction::background_flow;
        else if (v == "drop") sc.unmatched = flows::DefaultAction::drop;
        else s.fail(s.find("unmatched")->line, "unmatched: expected background|drop");
      }
      for (const ConfigNode& qn : child.children) {
        if (qn.kind != "queue") continue;
        Section qs{qn, sc.file};
        QueueDecl q;
        q.name = qn.name.empty() ? ("q" + std::to_string(sc.queues.size())) : qn.name;
        q.id = static_cast<int>(qs.integer("id", static_cast<int>(sc.queues.size())));
        q.n_q = static_cast<int>(qs.integer("n_q", 1));
        q.t_abs = qs.duration_or("t_abs", 0);
        q.t_pack = qs.duration_or("t_pack", 0);
        q.counter = static_cast<int>(qs.integer("counter", 0));
        q.r_max_pps = qs.number("r_max_pps", 0.0);
        q.t_d_us = qs.has("t_d_us") || qs.has("t_d_ms") || qs.has("t_d_s")
                       ? to_us(qs.duration_or("t_d", 0))
                       : 0.0;
        sc.queues.push_back(q);
      }
    } else if (child.kind == "stack") {
      sc.net_task_priority = static_cast<int>(s.integer("net_task_priority", sc.net_task_priority));
      sc.poll_priority = static_cast<int>(s.integer("poll_priority", sc.poll_priority));
      sc.poll_period = s.duration_or("poll_period", 0);
      sc.shortcircuit = s.flag("shortcircuit", true);
      sc.cache_deferral = s.flag("cache_deferral", true);
      if (s.has("recycle_policy")) {
        std::string v = s.str("recycle_policy");
        if (v == "drop-tail") sc.recycle_drop_head = false;
        else if (v == "drop-head") sc.recycle_drop_head = true;
        else s.fail(s.find("recycle_policy")->line, "recycle_policy: drop-tail|drop-head");
      }
      if (const ConfigNode* g = s.child("gate")) {
        Section gs{*g, sc.file};
        rxstack::GateConfig gate;
        gate.capacity = static_cast<std::uint64_t>(gs.integer("capacity", 0));
        gate.period = gs.duration_or("period", kMsec);
        if (gate.capacity == 0) gs.fail(g->line, "gate capacity must be >= 1");
        if (gate.period <= 0) gs.fail(g->line, "gate period must be positive");
        sc.gate = gate;
      }
    } else if (child.kind == "flow") {
      FlowDecl f;
      f.name = child.name;
      if (f.name.empty()) s.fail(child.line, "flow needs a name");
      f.proto = parse_proto(s, "protocol", flows::Protocol::udp);
      f.dst_port = static_cast<std::uint16_t>(s.integer("dst_port", 0));
      f.src = static_cast<std::uint32_t>(s.integer("src", 0));
      f.priority = static_cast<int>(s.integer("priority", 0));
      f.period = s.duration_or("period", kMsec);
      if (f.period <= 0) s.fail(child.line, "flow period must be positive");
      f.queue = s.str("queue", "");
      if (const ConfigNode* srv = s.child("server")) {
        Section ss{*srv, sc.file};
        std::int64_t cap = ss.integer("capacity", -1);
        if (cap >= 0) {
          f.server_capacity = static_cast<std::uint64_t>(cap);
          f.server_period = ss.duration_or("period", kMsec);
          if (f.server_period <= 0) ss.fail(srv->line, "server period must be positive");
        }
      }
      if (const ConfigNode* w = s.child("worker")) {
        Section ws{*w, sc.file};
        WorkerDecl wd;
        wd.priority = static_cast<int>(ws.integer("priority", f.priority));
        wd.workload = ws.duration_or("workload", 0);
        f.worker = wd;
      }
      if (s.has("bind_ms") || s.has("bind_us")) f.bind_at = s.duration_or("bind", 0);
      if (s.has("unbind_ms") || s.has("unbind_us")) f.unbind_at = s.duration_or("unbind", -1);
      sc.flows.push_back(std::move(f));
    } else if (child.kind == "task") {
      Section ts{child, sc.file};
      std::string kind = ts.str("kind", "monitor");
      if (kind != "monitor") ts.fail(child.line, "only 'monitor' tasks are declared here");
      MonitorDecl m;
      m.name = child.name.empty() ? "monitor" : child.name;
      m.priority = static_cast<int>(ts.integer("priority", 0));
      sc.monitors.push_back(m);
    } else if (child.kind == "source") {
      Section ss{child, sc.file};
      traffic::SourceSpec src;
      src.name = child.name.empty() ? ("source" + std::to_string(sc.sources.size())) : child.name;
      std::string pat = ss.require_str("pattern");
      if (pat == "constant") src.pattern = traffic::Pattern::constant;
      else if (pat == "burst") src.pattern = traffic::Pattern::burst;
      else if (pat == "ramp") src.pattern = traffic::Pattern::ramp;
      else if (pat == "replay") src.pattern = traffic::Pattern::replay;
      else ss.fail(ss.find("pattern")->line, "unknown pattern '" + pat + "'");

      if (ss.has("flow")) {
        src.header.dst_port = 0;  // resolved against the flow below
        src.file = "";
        const std::string fname = ss.str("flow");
        const FlowDecl* f = nullptr;
        for (const FlowDecl& fd : sc.flows) {
          if (fd.name == fname) f = &fd;
        }
        if (!f) ss.fail(child.line, "source references unknown flow '" + fname + "'");
        src.header.proto = f->proto;
        src.header.dst_port = f->dst_port;
        src.header.src = f->src;
      } else {
        src.header.proto = parse_proto(ss, "protocol", flows::Protocol::udp);
        src.header.dst_port = static_cast<std::uint16_t>(ss.integer("dst_port", 0));
        src.header.src = static_cast<std::uint32_t>(ss.integer("src", 0));
      }
      src.payload_len = static_cast<std::uint16_t>(ss.integer("len", 0));
      src.rate_pps = ss.number("rate_pps", 0.0);
      src.rate_end_pps = ss.number("rate_end_pps", 0.0);
      src.burst_count = static_cast<int>(ss.integer("count", 0));
      src.burst_gap = ss.duration_or("gap", 0);
      src.burst_period = ss.duration_or("period", 0);
      src.file = ss.str("file", src.file);
      src.start = ss.duration_or("start", 0);
      src.stop = ss.has("stop_ms") || ss.has("stop_us") || ss.has("stop_s")
                     ? ss.duration_or("stop", -1)
                     : -1;
      src.jitter = ss.duration_or("jitter", 0);
      src.validate();
      sc.sources.push_back(std::move(src));
    } else {
      top.fail(child.line, "unknown section '" + child.kind + "'");
    }
  }

  // Cross-checks.
  bool mq_mode = sc.mode == rxstack::PipelineMode::hardware ||
                 sc.mode == rxstack::PipelineMode::unified;
  for (const FlowDecl& f : sc.flows) {
    if (!f.queue.empty() && sc.find_queue(f.queue) == nullptr) {
      throw ScenarioError(sc.file, root.line,
                          "flow " + f.name + " references unknown queue '" + f.queue + "'");
    }
    if (mq_mode && f.queue.empty()) {
      throw ScenarioError(sc.file, root.line,
                          "flow " + f.name + " needs a queue in " +
                              std::string(rxstack::to_string(sc.mode)) + " mode");
    }
  }
  for (const QueueDecl& q : sc.queues) {
    nic::QueueConfig qc{q.id, q.n_q, q.t_abs, q.t_pack, q.counter, q.r_max_pps};
    try {
      qc.validate();
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(sc.file, root.line, "queue " + q.name + ": " + e.what());
    }
  }
  if (sc.gate.has_value() && (sc.mode == rxstack::PipelineMode::baseline ||
                              sc.mode == rxstack::PipelineMode::hardware)) {
    throw ScenarioError(sc.file, root.line,
                        "a global gate is not part of the " +
                            std::string(rxstack::to_string(sc.mode)) + " pipeline");
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  return build_scenario(parse_config_file(path));
}

}  // namespace rtrx::harness
