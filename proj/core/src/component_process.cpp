#include "component_process.hpp"

namespace dclab::detail {

using kernel::Context;
using kernel::DriverId;
using kernel::kNoNet;
using kernel::NetId;

namespace {

LogicValue read(const Context& ctx, NetId n) { return n == kNoNet ? LogicValue::X : ctx.value(n); }

/// Pin-indexed driver table from the ids handed out for the connected outputs.
std::vector<DriverId> driver_table(const ComponentModel& m, const std::vector<NetId>& nets,
                                   std::span<const DriverId> ids) {
  std::vector<DriverId> out(m.pins.size(), kNoDriver);
  std::size_t k = 0;
  for (std::size_t i : m.output_pins()) {
    if (nets[i] != kNoNet) out[i] = ids[k++];
  }
  return out;
}

class CombinationalProcess final : public kernel::Process {
 public:
  CombinationalProcess(const ComponentModel& m, std::vector<NetId> pin_nets, std::vector<DriverId> drivers,
                       TimeNs delay)
      : model_(m), nets_(std::move(pin_nets)), drivers_(std::move(drivers)), delay_(delay),
        pins_(m.pins.size(), LogicValue::X) {}

  void run(Context& ctx) override {
    for (std::size_t i = 0; i < pins_.size(); ++i) {
      if (model_.pins[i].direction == PinDirection::Input) pins_[i] = read(ctx, nets_[i]);
    }
    LogicVector out = eval_combinational(model_, std::span<const LogicValue>(pins_));
    for (std::size_t i = 0; i < pins_.size(); ++i) {
      if (drivers_[i] != kNoDriver) ctx.drive(drivers_[i], out[i], delay_);
    }
  }

 private:
  const ComponentModel& model_;
  std::vector<NetId> nets_;
  std::vector<DriverId> drivers_;
  TimeNs delay_;
  LogicVector pins_;
};

class SequentialProcess final : public kernel::Process {
 public:
  SequentialProcess(const ComponentModel& m, std::vector<NetId> pin_nets, std::vector<DriverId> drivers,
                    TimeNs delay, StateVector state)
      : model_(m), nets_(std::move(pin_nets)), drivers_(std::move(drivers)), delay_(delay),
        state_(std::move(state)) {}

  void run(Context& ctx) override {
    LogicVector cur(model_.pins.size(), LogicValue::X);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (model_.pins[i].direction == PinDirection::Input) cur[i] = read(ctx, nets_[i]);
    }
    if (prev_.empty()) prev_ = cur;
    EdgeEvent edge = EdgeEvent::detect(prev_, cur);
    IndexedStep step = step_sequential(model_, state_, std::span<const LogicValue>(cur), edge);
    state_ = std::move(step.state);
    prev_ = std::move(cur);
    for (std::size_t i = 0; i < step.pins.size(); ++i) {
      if (drivers_[i] != kNoDriver) ctx.drive(drivers_[i], step.pins[i], delay_);
    }
  }

 private:
  const ComponentModel& model_;
  std::vector<NetId> nets_;
  std::vector<DriverId> drivers_;
  TimeNs delay_;
  StateVector state_;
  LogicVector prev_;
};

/// Square wave that starts low: rising edges at phase + kP + (P - high),
/// falling edges at phase + (k + 1)P.
class ClockProcess final : public kernel::Process {
 public:
  ClockProcess(DriverId driver, const SignalSpec& spec)
      : driver_(driver), period_(clock_period_ns(spec)), high_(clock_high_ns(spec)), phase_(spec.phase_ns) {}

  void run(Context& ctx) override {
    TimeNs t = ctx.now();
    LogicValue level = LogicValue::Zero;
    TimeNs next = phase_ + period_ - high_;
    if (t >= phase_) {
      TimeNs k = (t - phase_) / period_;
      TimeNs base = phase_ + k * period_;
      TimeNs rise = base + period_ - high_;
      if (t >= rise) {
        level = LogicValue::One;
        next = base + period_;
      } else {
        next = rise;
      }
    }
    ctx.drive(driver_, level, 0);
    ctx.wake_after(next - t);
  }

 private:
  DriverId driver_;
  TimeNs period_;
  TimeNs high_;
  TimeNs phase_;
};

}  // namespace

ComponentLowering lower_component(const ComponentModel& m, const ParamMap& params, std::vector<NetId> pin_nets) {
  ComponentLowering out;
  for (std::size_t i : m.input_pins()) {
    if (pin_nets[i] != kNoNet) out.sensitivity.push_back(pin_nets[i]);
  }
  auto declare = [&](const LogicVector& initial) {
    std::vector<std::size_t> outs = m.output_pins();
    for (std::size_t k = 0; k < outs.size(); ++k) {
      if (pin_nets[outs[k]] != kNoNet) out.drivers.emplace_back(pin_nets[outs[k]], initial[k]);
    }
  };
  TimeNs delay = effective_delay(m, params);
  switch (m.kind) {
    case ComponentKind::Combinational:
      declare(power_on_outputs(m, params));
      out.make = [&m, nets = std::move(pin_nets), delay](std::span<const DriverId> ids) {
        return std::make_unique<CombinationalProcess>(m, nets, driver_table(m, nets, ids), delay);
      };
      break;
    case ComponentKind::Sequential:
      declare(LogicVector(m.output_pins().size(), LogicValue::X));
      out.make = [&m, nets = std::move(pin_nets), delay, state = initial_state(m, params)](
                     std::span<const DriverId> ids) {
        return std::make_unique<SequentialProcess>(m, nets, driver_table(m, nets, ids), delay, state);
      };
      break;
    case ComponentKind::Source: {
      NetId net = pin_nets[m.output_pins().front()];
      if (net == kNoNet) break;
      SignalSpec spec = source_signal(m, params);
      if (spec.kind == SignalKind::Clock) {
        out.drivers.emplace_back(net, LogicValue::Z);
        out.make = [spec](std::span<const DriverId> ids) { return std::make_unique<ClockProcess>(ids[0], spec); };
      } else {
        out.drivers.emplace_back(net, spec.value);
      }
      out.sensitivity.clear();
      break;
    }
    case ComponentKind::Display:
      out.sensitivity.clear();
      break;
  }
  return out;
}

}  // namespace dclab::detail
