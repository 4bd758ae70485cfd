#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace optdiverse {

using Rng = std::mt19937_64;

/// Raised for invalid layouts, configs, and other caller mistakes that are
/// detected before any learning starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

/// Index into Grid::free_cells().
struct StateId {
  int index = 0;
  auto operator<=>(const StateId&) const = default;
};

enum class Action : int { up = 0, down = 1, left = 2, right = 3 };
inline constexpr int kNumActions = 4;

struct StepOutcome {
  StateId next_state;
  double reward = 0.0;
  bool terminal = false;
};

/// Immutable gridworld layout. Walls and free cells partition the rectangle;
/// every free cell is reachable from every other one.
class Grid {
 public:
  /// Parses an ASCII map: `#` wall, `.` free, `H` hallway, `G` goal.
  /// A `G` cell sitting in a doorway (walls on both sides along one axis)
  /// is also labelled a hallway.
  static Grid parse(std::string_view text);

  int width() const { return width_; }
  int height() const { return height_; }
  int num_states() const { return static_cast<int>(free_cells_.size()); }

  std::span<const Cell> free_cells() const { return free_cells_; }
  Cell cell(StateId s) const { return free_cells_[s.index]; }
  bool is_wall(Cell c) const;
  /// -1 for walls and out-of-range cells.
  int state_index(Cell c) const;

  std::span<const StateId> hallways() const { return hallways_; }
  bool is_hallway(StateId s) const;
  std::span<const StateId> goals() const { return goals_; }
  bool is_goal(StateId s) const;

  /// Precomputed move result; blocked moves stay in place.
  StateId neighbor(StateId s, Action a) const {
    return StateId{moves_[static_cast<std::size_t>(s.index) * kNumActions +
                          static_cast<std::size_t>(a)]};
  }

  /// Same layout with a different goal set.
  Grid with_goals(std::vector<StateId> goals) const;

  /// Renders back to the ASCII map format.
  std::string to_ascii() const;

  bool same_layout(const Grid& other) const;

 private:
  Grid() = default;
  void finalize();

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> walls_;  // row-major, 1 = wall
  std::vector<int> index_;           // row-major, -1 = wall
  std::vector<Cell> free_cells_;
  std::vector<StateId> hallways_;
  std::vector<StateId> goals_;
  std::vector<std::uint8_t> goal_mask_;
  std::vector<std::uint8_t> hallway_mask_;
  std::vector<int> moves_;
};

extern const std::string_view kFourRoomsMap;
extern const std::string_view kTMazeMap;

/// Canonical 13x13 four-rooms layout, goal in the east hallway.
Grid build_four_rooms();
/// T-shaped corridor with a goal at each end of the bar.
Grid build_tmaze_grid();

/// Lower-right room of the four-rooms layout: below the east interior wall
/// row and right of the vertical interior wall.
bool in_lower_right_room(Cell c);

/// Uniform draw over non-goal free cells.
StateId reset(const Grid& grid, Rng& rng);
StepOutcome step(const Grid& grid, StateId s, Action a);
/// With probability `slip` the intended move is replaced by a move to a
/// uniformly drawn open neighbour cell; otherwise identical to step().
StepOutcome step_with_slip(const Grid& grid, StateId s, Action a, double slip, Rng& rng);

/// Moves the (single) goal to a cell drawn uniformly from the free cells
/// matching `region`.
Grid relocate_goal(const Grid& grid, const std::function<bool(Cell)>& region, Rng& rng);

}  // namespace optdiverse
