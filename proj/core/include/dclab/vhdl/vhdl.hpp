#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dclab/components.hpp"
#include "dclab/kernel.hpp"
#include "dclab/netlist.hpp"
#include "dclab/sim.hpp"
#include "dclab/stimulus.hpp"
#include "dclab/vhdl/ast.hpp"

namespace dclab::vhdl {

inline constexpr std::string_view kGeneratorVersion = "dclab-vhdl 1.0";

enum class UnitKind { EntityArch, Testbench };

struct VhdlUnit {
  std::string source_name;
  std::string text;
  UnitKind kind = UnitKind::EntityArch;
};

enum class Severity { Error, Warning };
enum class Category { Lex, Syntax, Name, Type, Elaboration };

std::string_view to_string(Severity s) noexcept;
std::string_view to_string(Category c) noexcept;

struct Diagnostic {
  Severity severity = Severity::Error;
  Category category = Category::Syntax;
  std::string file;
  std::uint32_t line = 1;
  std::uint32_t column = 1;
  std::string message;

  /// "file:line:column: error[SYNTAX]: message"
  std::string to_string() const;
};

bool has_errors(const std::vector<Diagnostic>& diags);

struct ParseResult {
  Ast ast;
  std::vector<Diagnostic> diagnostics;
};

/// Never throws on malformed input; every problem becomes a Diagnostic and the
/// parser resynchronises at the next statement or design unit.
ParseResult parse_vhdl(const std::vector<VhdlUnit>& units);

/// A flattened design ready for the kernel. Immutable: instantiate() builds a
/// fresh kernel design (with fresh process state) for each run.
class ElaboratedDesign {
 public:
  struct ProcessTemplate {
    std::function<std::unique_ptr<kernel::Process>()> make;
    std::vector<kernel::NetId> sensitivity;
  };

  std::string top;
  std::vector<kernel::NetDecl> nets;
  std::vector<kernel::DriverDecl> drivers;
  std::vector<ProcessTemplate> processes;
  std::vector<kernel::PortDecl> inputs;
  std::vector<kernel::PortDecl> outputs;
  std::vector<kernel::PortDecl> internals;
  /// VHDL signal name (hierarchical, lowercase) -> nets, leftmost element first.
  std::map<std::string, std::vector<kernel::NetId>> signal_map;

  kernel::SimDesign instantiate() const;
};

struct ElaborationResult {
  std::optional<ElaboratedDesign> design;
  std::vector<Diagnostic> diagnostics;
};

/// Name and type checks, binding of instances (parsed entities first, then
/// catalog parts such as ttl_74ls00) and flattening into kernel processes.
/// Catalog-bound instances reference `registry`, which must outlive the design.
ElaborationResult elaborate(const Ast& ast, std::string_view top, const ComponentRegistry& registry);

/// The one entity with an architecture that no parsed architecture
/// instantiates; nullopt when there are zero or several candidates.
std::optional<std::string> infer_top(const Ast& ast);

/// parse + elaborate. Throws ContractError listing the error diagnostics;
/// warnings are appended to `warnings` when given.
ElaboratedDesign compile_vhdl(const std::vector<VhdlUnit>& units, std::string_view top,
                              const ComponentRegistry& registry, std::vector<Diagnostic>* warnings = nullptr);

/// Runs an elaborated design; stimulus keys and probe names go through port_label.
SimResult simulate_elaborated(const ElaboratedDesign& design, const StimulusSet& stim, const SimConfig& cfg);

/// parse + elaborate + run with `stim` bound to the top entity's inputs.
/// Throws ContractError carrying the diagnostics when the design has errors.
SimResult simulate_vhdl(const std::vector<VhdlUnit>& units, std::string_view top, const StimulusSet& stim,
                        const SimConfig& cfg, const ComponentRegistry& registry);

// --- emission ------------------------------------------------------------------

/// VHDL entity name of a catalog part: "74LS00" -> "ttl_74ls00",
/// "SEVEN_SEG" -> "dclab_seven_seg".
std::string entity_name(std::string_view part);

/// VHDL identifier for a pin or port name: lowercase, "p" before a leading
/// digit, reserved words and invalid characters avoided.
std::string identifier(std::string_view name);

/// Top-level structural unit followed by the component library unit.
/// Throws ContractError if the circuit does not validate.
std::vector<VhdlUnit> emit_vhdl(const Circuit& c, const ComponentRegistry& registry);

/// Behavioural architectures for every part in `registry` (dclab_lib.vhd).
VhdlUnit emit_library(const ComponentRegistry& registry);

/// Testbench entity <top>_tb driving the emitted top with `stim`. Throws
/// ContractError if a top input has no stimulus or a stimulus names no input.
VhdlUnit emit_testbench(const Circuit& c, const StimulusSet& stim);

/// Trace label of a circuit port after emission: "S[2]" -> "s[2]", "Cin" -> "cin".
std::string port_label(std::string_view port_name);

/// Entity name emit_vhdl gives the top-level unit of `c`.
std::string top_entity_name(const Circuit& c);

}  // namespace dclab::vhdl
