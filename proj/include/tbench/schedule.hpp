#pragma once

#include <string>

namespace tbench {

struct ScheduleSpec {
  enum class Kind { constant, step_decay, cyclic_triangular };
  Kind kind = Kind::constant;
  // step_decay: lr = base * gamma^floor(epoch / every_epochs)
  double gamma = 0.5;
  int every_epochs = 10;
  // cyclic_triangular: wave between lr_base and lr_max, half-period
  // step_size counted in optimizer steps; base_lr is ignored.
  double lr_base = 1e-4;
  double lr_max = 1e-2;
  int step_size = 100;

  void validate() const;
  std::string describe() const;
  bool operator==(const ScheduleSpec&) const = default;
};

double lr_at(const ScheduleSpec& schedule, double base_lr, int epoch, long step);

}  // namespace tbench
