#include "dclab/kernel.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <set>

#include "dclab/error.hpp"

namespace dclab::kernel {

NetId SimDesign::add_net(std::string name, LogicValue initial) {
  nets.push_back({std::move(name), initial});
  readers.emplace_back();
  return static_cast<NetId>(nets.size() - 1);
}

DriverId SimDesign::add_driver(NetId net, LogicValue initial) {
  if (net >= nets.size()) throw ContractError("add_driver: no such net");
  drivers.push_back({net, initial});
  return static_cast<DriverId>(drivers.size() - 1);
}

ProcessId SimDesign::add_process(std::unique_ptr<Process> p, std::span<const NetId> sensitivity) {
  processes.push_back(std::move(p));
  auto id = static_cast<ProcessId>(processes.size() - 1);
  for (NetId n : sensitivity) sensitize(id, n);
  return id;
}

void SimDesign::sensitize(ProcessId p, NetId net) {
  if (net >= nets.size()) throw ContractError("sensitize: no such net");
  auto& r = readers[net];
  if (std::find(r.begin(), r.end(), p) == r.end()) r.push_back(p);
}

namespace {

struct Stamp {
  TimeNs time = 0;
  std::uint32_t delta = 0;

  friend auto operator<=>(const Stamp&, const Stamp&) = default;
};

enum class EntryKind : std::uint8_t { Driver, Wake, Stimulus };

struct Entry {
  Stamp at;
  std::uint64_t seq = 0;
  EntryKind kind = EntryKind::Driver;
  std::uint32_t id = 0;  // driver, process or waveform index

  bool operator>(const Entry& o) const {
    if (at != o.at) return at > o.at;
    return seq > o.seq;
  }
};

struct Transaction {
  Stamp at;
  std::uint64_t seq = 0;
  LogicValue value = LogicValue::Z;
};

class Engine final : public Context {
 public:
  Engine(SimDesign& d, std::vector<Waveform> stimuli, const std::vector<WatchSignal>& watch,
         const RunOptions& opt)
      : design_(d), stimuli_(std::move(stimuli)), watch_(watch), opt_(opt) {}

  SimResult run() {
    init();
    while (!queue_.empty() && !result_.fault) {
      Stamp at = queue_.top().at;
      if (at.time >= opt_.horizon_ns) break;
      if (at.time != instant_) {
        close_instant();
        instant_ = at.time;
      }
      if (at.delta > opt_.max_deltas_per_instant) {
        oscillation(at);
        break;
      }
      step(at);
    }
    if (!result_.fault) close_instant();
    result_.trace.horizon_ns = result_.fault ? result_.fault->time_ns : opt_.horizon_ns;
    return std::move(result_);
  }

  // --- Context --------------------------------------------------------------

  TimeNs now() const override { return now_.time; }
  LogicValue value(NetId n) const override { return net_value_[n]; }
  LogicValue last_value(NetId n) const override { return net_last_[n]; }
  bool event(NetId n) const override { return net_event_serial_[n] == serial_; }
  bool timer_expired() const override { return timer_fired_; }

  void drive(DriverId d, LogicValue v, TimeNs delay) override {
    Stamp at = delay == 0 ? Stamp{now_.time, now_.delta + 1} : Stamp{now_.time + delay, 0};
    auto& pending = pending_[d];
    while (!pending.empty() && pending.back().at >= at) pending.pop_back();
    LogicValue effective = pending.empty() ? driver_value_[d] : pending.back().value;
    if (effective == v) return;
    std::uint64_t seq = next_seq_++;
    pending.push_back({at, seq, v});
    queue_.push({at, seq, EntryKind::Driver, d});
  }

  void wake_after(TimeNs delay) override {
    Stamp at = delay == 0 ? Stamp{now_.time, now_.delta + 1} : Stamp{now_.time + delay, 0};
    std::uint64_t seq = next_seq_++;
    wake_token_[current_] = seq;
    queue_.push({at, seq, EntryKind::Wake, current_});
  }

  void warn(std::string code, std::string message) override {
    result_.log.add(LogLevel::Warning, now_.time, std::move(code), std::move(message));
  }

  void fail(std::string code, std::string message) override {
    if (result_.fault) return;
    std::string text = message;
    result_.fault = SimFault{code, now_.time, {}, std::move(message)};
    result_.log.add(LogLevel::Error, now_.time, std::move(code), std::move(text));
  }

 private:
  void init() {
    const std::size_t nets = design_.nets.size();
    net_drivers_.resize(nets);
    for (DriverId d = 0; d < design_.drivers.size(); ++d) {
      net_drivers_[design_.drivers[d].net].push_back(d);
      driver_value_.push_back(design_.drivers[d].initial);
    }
    stim_driver_.resize(stimuli_.size());
    stim_next_.assign(stimuli_.size(), 0);
    for (std::size_t w = 0; w < stimuli_.size(); ++w) {
      NetId n = stimuli_[w].net;
      if (n >= nets) throw ContractError("stimulus waveform names no net");
      stim_driver_[w] = static_cast<DriverId>(driver_value_.size());
      net_drivers_[n].push_back(stim_driver_[w]);
      driver_value_.push_back(LogicValue::Z);
      schedule_stimulus(static_cast<std::uint32_t>(w));
    }
    pending_.resize(driver_value_.size());
    wake_token_.assign(design_.processes.size(), 0);
    net_value_.resize(nets);
    for (NetId n = 0; n < nets; ++n) net_value_[n] = resolved(n);
    net_last_ = net_value_;
    net_event_serial_.assign(nets, 0);
    conflict_.assign(nets, false);
    x_reported_.assign(nets, false);
    instant_dirty_.assign(nets, false);

    watch_index_.resize(nets);
    for (std::size_t i = 0; i < watch_.size(); ++i) {
      const auto& w = watch_[i];
      TraceSignal sig{w.label, w.net == kNoNet ? std::string() : design_.nets[w.net].name, {}};
      sig.changes.push_back({0, w.net == kNoNet ? LogicValue::Z : net_value_[w.net]});
      result_.trace.signals.push_back(std::move(sig));
      if (w.net != kNoNet) watch_index_[w.net].push_back(i);
    }

    // Every process runs once at (0, 0).
    for (ProcessId p = 0; p < design_.processes.size(); ++p) {
      queue_.push({{0, 0}, next_seq_++, EntryKind::Wake, p});
      wake_token_[p] = kInitialRun;
    }
  }

  void schedule_stimulus(std::uint32_t w) {
    const auto& changes = stimuli_[w].changes;
    std::size_t k = stim_next_[w];
    if (k >= changes.size()) return;
    queue_.push({{changes[k].time_ns, 0}, next_seq_++, EntryKind::Stimulus, w});
  }

  LogicValue resolved(NetId n) const {
    const auto& drivers = net_drivers_[n];
    if (drivers.empty()) return design_.nets[n].initial;
    LogicValue v = LogicValue::Z;
    for (DriverId d : drivers) v = resolve(v, driver_value_[d]);
    return v;
  }

  // One delta cycle: update drivers, then run the woken processes.
  void step(Stamp at) {
    now_ = at;
    ++serial_;
    std::set<NetId> touched;
    std::set<ProcessId> timed;
    std::set<ProcessId> woken;
    while (!queue_.empty() && queue_.top().at == at) {
      Entry e = queue_.top();
      queue_.pop();
      switch (e.kind) {
        case EntryKind::Driver: {
          auto& pending = pending_[e.id];
          if (pending.empty() || pending.front().seq != e.seq) break;  // cancelled
          driver_value_[e.id] = pending.front().value;
          pending.pop_front();
          touched.insert(design_.drivers[e.id].net);
          break;
        }
        case EntryKind::Stimulus: {
          const auto& change = stimuli_[e.id].changes[stim_next_[e.id]++];
          driver_value_[stim_driver_[e.id]] = change.value;
          touched.insert(stimuli_[e.id].net);
          schedule_stimulus(e.id);
          break;
        }
        case EntryKind::Wake:
          if (wake_token_[e.id] == e.seq || wake_token_[e.id] == kInitialRun) {
            wake_token_[e.id] = 0;
            timed.insert(e.id);
            woken.insert(e.id);
          }
          break;
      }
    }
    last_changed_.clear();
    for (NetId n : touched) {
      LogicValue v = resolved(n);
      check_conflict(n);
      if (v == net_value_[n]) continue;
      if (v == LogicValue::X && is_known(net_value_[n]) && !x_reported_[n] && !watch_index_[n].empty()) {
        x_reported_[n] = true;
        result_.log.add(LogLevel::Warning, at.time, "X_PROPAGATION",
                        design_.nets[n].name + " became X");
      }
      net_last_[n] = net_value_[n];
      net_value_[n] = v;
      net_event_serial_[n] = serial_;
      instant_dirty_[n] = true;
      dirty_list_.push_back(n);
      last_changed_.push_back(n);
      for (ProcessId p : design_.readers[n]) woken.insert(p);
    }
    for (ProcessId p : woken) {
      current_ = p;
      timer_fired_ = timed.contains(p);
      design_.processes[p]->run(*this);
      if (result_.fault) {
        result_.fault->nets = names(last_changed_);
        return;
      }
    }
  }

  void check_conflict(NetId n) {
    bool zero = false;
    bool one = false;
    for (DriverId d : net_drivers_[n]) {
      zero = zero || driver_value_[d] == LogicValue::Zero;
      one = one || driver_value_[d] == LogicValue::One;
    }
    bool now_conflict = zero && one;
    if (now_conflict && !conflict_[n]) {
      result_.log.add(LogLevel::Warning, now_.time, "DRIVER_CONFLICT",
                      design_.nets[n].name + " is driven to both 0 and 1");
    }
    conflict_[n] = now_conflict;
  }

  void close_instant() {
    for (NetId n : dirty_list_) {
      if (!instant_dirty_[n]) continue;
      instant_dirty_[n] = false;
      for (std::size_t i : watch_index_[n]) {
        auto& changes = result_.trace.signals[i].changes;
        if (changes.back().value == net_value_[n]) continue;
        if (changes.back().time_ns == instant_) {
          changes.back().value = net_value_[n];
          if (changes.size() > 1 && changes[changes.size() - 2].value == net_value_[n]) changes.pop_back();
        } else {
          changes.push_back({instant_, net_value_[n]});
        }
      }
    }
    dirty_list_.clear();
  }

  void oscillation(Stamp at) {
    std::string msg = "no stable state after " + std::to_string(opt_.max_deltas_per_instant) +
                      " delta cycles at " + std::to_string(at.time) + " ns";
    std::vector<std::string> nets = names(last_changed_);
    if (!nets.empty()) {
      msg += "; still changing:";
      for (const auto& n : nets) msg += " " + n;
    }
    result_.fault = SimFault{"OSCILLATION", at.time, std::move(nets), msg};
    result_.log.add(LogLevel::Error, at.time, "OSCILLATION", std::move(msg));
  }

  std::vector<std::string> names(const std::vector<NetId>& ids) const {
    std::vector<std::string> out;
    for (NetId n : ids) out.push_back(design_.nets[n].name);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.size() > 16) out.resize(16);
    return out;
  }

  static constexpr std::uint64_t kInitialRun = ~std::uint64_t{0};

  SimDesign& design_;
  std::vector<Waveform> stimuli_;
  const std::vector<WatchSignal>& watch_;
  RunOptions opt_;
  SimResult result_;

  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue_;
  std::uint64_t next_seq_ = 1;
  Stamp now_;
  TimeNs instant_ = 0;
  std::uint64_t serial_ = 0;

  std::vector<std::vector<DriverId>> net_drivers_;
  std::vector<LogicValue> driver_value_;
  std::vector<std::deque<Transaction>> pending_;
  std::vector<DriverId> stim_driver_;
  std::vector<std::size_t> stim_next_;
  std::vector<std::uint64_t> wake_token_;

  std::vector<LogicValue> net_value_;
  std::vector<LogicValue> net_last_;
  std::vector<std::uint64_t> net_event_serial_;
  std::vector<bool> conflict_;
  std::vector<bool> x_reported_;
  std::vector<bool> instant_dirty_;
  std::vector<NetId> dirty_list_;
  std::vector<NetId> last_changed_;
  std::vector<std::vector<std::size_t>> watch_index_;

  ProcessId current_ = 0;
  bool timer_fired_ = false;
};

}  // namespace

SimResult run(SimDesign& design, std::vector<Waveform> stimuli, const std::vector<WatchSignal>& watch,
              const RunOptions& options) {
  if (options.max_deltas_per_instant == 0) throw ContractError("max_deltas_per_instant must be positive");
  return Engine(design, std::move(stimuli), watch, options).run();
}

}  // namespace dclab::kernel
