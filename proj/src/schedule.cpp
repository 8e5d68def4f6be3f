#include "tbench/schedule.hpp"

#include <cmath>

#include "tbench/error.hpp"

namespace tbench {

void ScheduleSpec::validate() const {
  if (kind == Kind::step_decay) {
    if (!(gamma > 0.0 && gamma < 1.0))
      throw ConfigError("step_decay: gamma must be in (0,1)");
    if (every_epochs < 1) throw ConfigError("step_decay: every_epochs must be >= 1");
  } else if (kind == Kind::cyclic_triangular) {
    if (!(lr_base < lr_max))
      throw ConfigError("cyclic: lr_base must be < lr_max");
    if (step_size < 1) throw ConfigError("cyclic: step_size must be >= 1");
  }
}

std::string ScheduleSpec::describe() const {
  switch (kind) {
    case Kind::constant: return "constant";
    case Kind::step_decay:
      return "step_decay(gamma=" + std::to_string(gamma) +
             ",every=" + std::to_string(every_epochs) + ")";
    case Kind::cyclic_triangular: return "cyclic_triangular";
  }
  return "?";
}

double lr_at(const ScheduleSpec& s, double base_lr, int epoch, long step) {
  if (epoch < 0 || step < 0) throw ConfigError("lr_at: epoch/step must be >= 0");
  s.validate();
  switch (s.kind) {
    case ScheduleSpec::Kind::constant:
      return base_lr;
    case ScheduleSpec::Kind::step_decay:
      return base_lr * std::pow(s.gamma, static_cast<double>(epoch / s.every_epochs));
    case ScheduleSpec::Kind::cyclic_triangular: {
      double pos = static_cast<double>(step) / static_cast<double>(s.step_size);
      double cycle = std::floor(1.0 + pos / 2.0);
      double x = std::fabs(pos - 2.0 * cycle + 1.0);
      return s.lr_base + (s.lr_max - s.lr_base) * std::max(0.0, 1.0 - x);
    }
  }
  throw ConfigError("lr_at: unknown schedule kind");
}

}  // namespace tbench
