#include "cli.hpp"

#include <algorithm>
#include <memory>

#include "commands.hpp"
#include "ocp/errors.hpp"
#include "params.hpp"

namespace ocp::cli {

namespace {

int fail(std::ostream& err, ExitCode code, const std::string& kind, const std::string& message,
         json extra = json::object()) {
  json record{{"error", kind}, {"message", message}, {"exit_code", static_cast<int>(code)}};
  for (auto it = extra.begin(); it != extra.end(); ++it) record[it.key()] = it.value();
  err << record.dump() << "\n";
  return code;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contact process on oriented percolation: simulation and critical-rate estimation", "ocp"};
  app.require_subcommand(1, 1);

  struct Slot {
    const Command* command;
    CLI::App* app;
    std::unique_ptr<ParamSet> params;
    std::string config_path;
    std::string out_path = "-";
  };
  std::vector<std::unique_ptr<Slot>> slots;
  std::vector<std::string> names;
  for (const auto& c : commands()) names.push_back(c.name);
  for (const auto& c : commands()) {
    auto slot = std::make_unique<Slot>();
    slot->command = &c;
    slot->app = app.add_subcommand(c.name, c.help);
    slot->app->add_option("--config", slot->config_path, "JSON config (or a previous result file)");
    slot->app->add_option("--out", slot->out_path, "output path ('-' for stdout)");
    slot->params = std::make_unique<ParamSet>(slot->app);
    c.declare(*slot->params);
    slots.push_back(std::move(slot));
  }

  if (args.size() >= 2 && !args[1].empty() && args[1][0] != '-' &&
      std::find(names.begin(), names.end(), args[1]) == names.end())
    return fail(err, kUsage, "usage", "unknown subcommand '" + args[1] + "'");

  // CLI11 wants argv without the program name, in reverse order.
  std::vector<std::string> rest(args.rbegin(), args.rend());
  if (!rest.empty()) rest.pop_back();
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    return fail(err, kUsage, "usage", e.what());
  }

  for (const auto& s : slots) {
    if (!s->app->parsed()) continue;
    const std::string& name = s->command->name;
    try {
      json file = json::object();
      if (!s->config_path.empty()) file = config_block(load_config_file(s->config_path), name, names);
      s->params->resolve(file);
      const std::string text = s->command->run(*s->params);
      emit(s->out_path, text, out);
      return kOk;
    } catch (const UsageError& e) {
      return fail(err, kUsage, "usage", e.what());
    } catch (const ConfigError& e) {
      return fail(err, kConfig, "config", e.what());
    } catch (const json::exception& e) {
      return fail(err, kConfig, "config", e.what());
    } catch (const BudgetExceeded& e) {
      return fail(err, kBudget, "budget", e.what());
    } catch (const ContractViolation& e) {
      return fail(err, kContract, "contract", e.what());
    } catch (const BracketError& e) {
      return fail(err, kBracket, "bracket", e.what(),
                  {{"survival_lo", e.survival_lo()}, {"survival_hi", e.survival_hi()}});
    } catch (const DivergenceError& e) {
      return fail(err, kDivergence, "divergence", e.what());
    } catch (const std::exception& e) {
      return fail(err, kInternal, "internal", e.what());
    }
  }
  return fail(err, kUsage, "usage", "no subcommand given");
}

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return cli_dispatch(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace ocp::cli
