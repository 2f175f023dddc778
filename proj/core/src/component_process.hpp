#pragma once

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "dclab/components.hpp"
#include "dclab/kernel.hpp"

namespace dclab::detail {

inline constexpr kernel::DriverId kNoDriver = ~kernel::DriverId{0};

/// Kernel lowering of one catalog part instance. `drivers` must be declared in
/// order; `make` (absent for constants and displays) receives their ids.
/// The model is referenced, so the registry has to outlive every process.
struct ComponentLowering {
  std::vector<std::pair<kernel::NetId, LogicValue>> drivers;
  std::function<std::unique_ptr<kernel::Process>(std::span<const kernel::DriverId>)> make;
  std::vector<kernel::NetId> sensitivity;
};

/// `pin_nets` is indexed by pin; kNoNet for unconnected pins.
ComponentLowering lower_component(const ComponentModel& m, const ParamMap& params,
                                  std::vector<kernel::NetId> pin_nets);

}  // namespace dclab::detail
