#pragma once

#include "darcy.hpp"
#include "grid.hpp"

#include <array>
#include <variant>

namespace dsmc {

enum class ModelKind { P1, P2 };

const char* to_string(ModelKind m);

/// Sinusoidal channel: lower edge x2 = d1 sin(d2 x1 / 6) + tan(d3) x1 + d4,
/// upper edge the lower edge shifted up by the width d5.
struct ChannelGeometry {
  std::array<double, 5> d{};

  [[nodiscard]] double amplitude() const { return d[0]; }
  [[nodiscard]] double frequency() const { return d[1]; }
  [[nodiscard]] double angle() const { return d[2]; }
  [[nodiscard]] double intercept() const { return d[3]; }
  [[nodiscard]] double width() const { return d[4]; }

  friend bool operator==(const ChannelGeometry&, const ChannelGeometry&) = default;
};

/// Log-conductivity field on the whole grid.
struct FieldParameter {
  GridField logk;
};

/// Channel geometry plus log-conductivity fields used inside (u1) and
/// outside (u2) the channel; both fields cover the whole grid.
struct ChannelParameter {
  ChannelGeometry geom;
  GridField inside;
  GridField outside;
};

/// Unknown of the inverse problem, one alternative per parameterisation.
class Parameter {
 public:
  Parameter() = default;
  Parameter(FieldParameter p) : value_(std::move(p)) {}
  Parameter(ChannelParameter p) : value_(std::move(p)) {}

  [[nodiscard]] ModelKind model() const { return value_.index() == 0 ? ModelKind::P1 : ModelKind::P2; }
  [[nodiscard]] const Grid& grid() const;

  [[nodiscard]] const FieldParameter& field() const { return std::get<FieldParameter>(value_); }
  FieldParameter& field() { return std::get<FieldParameter>(value_); }
  [[nodiscard]] const ChannelParameter& channel() const { return std::get<ChannelParameter>(value_); }
  ChannelParameter& channel() { return std::get<ChannelParameter>(value_); }

 private:
  std::variant<FieldParameter, ChannelParameter> value_;
};

double lower_boundary(double x1, const ChannelGeometry& geom);

/// Closed band: points on either edge count as inside.
bool channel_indicator(const darcy::Point& x, const ChannelGeometry& geom);

/// Cell-centre channel membership for every cell of the grid.
std::vector<bool> channel_mask(const Grid& grid, const ChannelGeometry& geom);

/// Conductivity exp(u) for P1; exp(u1) on channel cells and exp(u2) elsewhere for P2.
GridField realize_permeability(const Parameter& u);

}  // namespace dsmc
