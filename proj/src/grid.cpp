#include "optdiverse/grid.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

namespace optdiverse {

// Kept identical to maps/four_rooms.txt and maps/tmaze.txt (checked by tests).
const std::string_view kFourRoomsMap =
    "#############\n"
    "#.....#.....#\n"
    "#.....#.....#\n"
    "#.....H.....#\n"
    "#.....#.....#\n"
    "#.....#.....#\n"
    "##H####.....#\n"
    "#.....###G###\n"
    "#.....#.....#\n"
    "#.....#.....#\n"
    "#.....H.....#\n"
    "#.....#.....#\n"
    "#############\n";

const std::string_view kTMazeMap =
    "#########\n"
    "#G.....G#\n"
    "####.####\n"
    "####.####\n"
    "####.####\n"
    "####.####\n"
    "#########\n";

namespace {

constexpr int kVerticalWallCol = 6;
constexpr int kEastWallRow = 7;

constexpr std::array<Cell, kNumActions> kOffsets{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

std::vector<std::string_view> split_rows(std::string_view text) {
  std::vector<std::string_view> rows;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    rows.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  return rows;
}

}  // namespace

Grid Grid::parse(std::string_view text) {
  auto rows = split_rows(text);
  if (rows.empty()) throw ConfigError("map: empty layout");
  Grid g;
  g.height_ = static_cast<int>(rows.size());
  g.width_ = static_cast<int>(rows.front().size());
  if (g.width_ == 0) throw ConfigError("map: empty first row");
  g.walls_.assign(static_cast<std::size_t>(g.width_ * g.height_), 0);
  g.index_.assign(g.walls_.size(), -1);

  std::vector<Cell> hallway_cells, goal_cells;
  for (int r = 0; r < g.height_; ++r) {
    if (static_cast<int>(rows[r].size()) != g.width_)
      throw ConfigError("map: ragged row " + std::to_string(r));
    for (int c = 0; c < g.width_; ++c) {
      const auto flat = static_cast<std::size_t>(r * g.width_ + c);
      switch (rows[r][c]) {
        case '#':
          g.walls_[flat] = 1;
          break;
        case '.':
          break;
        case 'H':
          hallway_cells.push_back({r, c});
          break;
        case 'G':
          goal_cells.push_back({r, c});
          break;
        default:
          throw ConfigError("map: unknown glyph '" + std::string(1, rows[r][c]) + "' at row " +
                            std::to_string(r) + " col " + std::to_string(c));
      }
      if (!g.walls_[flat]) {
        g.index_[flat] = static_cast<int>(g.free_cells_.size());
        g.free_cells_.push_back({r, c});
      }
    }
  }
  if (g.free_cells_.empty()) throw ConfigError("map: no free cells");
  if (goal_cells.empty()) throw ConfigError("map: no goal cell");

  // A goal glyph hides a hallway glyph, so doorway goals are detected here:
  // walled on both sides along one axis, open on both sides along the other.
  for (Cell c : goal_cells) {
    auto wall = [&](int dr, int dc) { return g.is_wall({c.row + dr, c.col + dc}); };
    bool ns_door = wall(0, -1) && wall(0, 1) && !wall(-1, 0) && !wall(1, 0);
    bool ew_door = wall(-1, 0) && wall(1, 0) && !wall(0, -1) && !wall(0, 1);
    if (ns_door || ew_door) hallway_cells.push_back(c);
  }
  std::sort(hallway_cells.begin(), hallway_cells.end());
  for (Cell c : hallway_cells) g.hallways_.push_back(StateId{g.state_index(c)});
  std::sort(goal_cells.begin(), goal_cells.end());
  for (Cell c : goal_cells) g.goals_.push_back(StateId{g.state_index(c)});

  g.finalize();

  // Connectivity over the 4-connected move graph.
  std::vector<std::uint8_t> seen(g.free_cells_.size(), 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    int s = frontier.front();
    frontier.pop();
    for (int a = 0; a < kNumActions; ++a) {
      int n = g.moves_[static_cast<std::size_t>(s) * kNumActions + a];
      if (!seen[n]) {
        seen[n] = 1;
        ++reached;
        frontier.push(n);
      }
    }
  }
  if (reached != g.free_cells_.size())
    throw ConfigError("map: free cells are not connected (" + std::to_string(reached) + " of " +
                      std::to_string(g.free_cells_.size()) + " reachable)");
  return g;
}

void Grid::finalize() {
  const auto n = free_cells_.size();
  moves_.resize(n * kNumActions);
  for (std::size_t s = 0; s < n; ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      Cell target{free_cells_[s].row + kOffsets[a].row, free_cells_[s].col + kOffsets[a].col};
      int t = state_index(target);
      moves_[s * kNumActions + a] = t < 0 ? static_cast<int>(s) : t;
    }
  }
  goal_mask_.assign(n, 0);
  for (StateId g : goals_) goal_mask_[g.index] = 1;
  hallway_mask_.assign(n, 0);
  for (StateId h : hallways_) hallway_mask_[h.index] = 1;
}

bool Grid::is_wall(Cell c) const { return state_index(c) < 0; }

int Grid::state_index(Cell c) const {
  if (c.row < 0 || c.col < 0 || c.row >= height_ || c.col >= width_) return -1;
  return index_[static_cast<std::size_t>(c.row * width_ + c.col)];
}

bool Grid::is_hallway(StateId s) const { return hallway_mask_[s.index] != 0; }
bool Grid::is_goal(StateId s) const { return goal_mask_[s.index] != 0; }

Grid Grid::with_goals(std::vector<StateId> goals) const {
  if (goals.empty()) throw ConfigError("grid: at least one goal required");
  for (StateId g : goals)
    if (g.index < 0 || g.index >= num_states()) throw ConfigError("grid: goal out of range");
  std::sort(goals.begin(), goals.end());
  goals.erase(std::unique(goals.begin(), goals.end()), goals.end());
  Grid out = *this;
  out.goals_ = std::move(goals);
  out.goal_mask_.assign(free_cells_.size(), 0);
  for (StateId g : out.goals_) out.goal_mask_[g.index] = 1;
  return out;
}

std::string Grid::to_ascii() const {
  std::string out;
  out.reserve(static_cast<std::size_t>((width_ + 1) * height_));
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      int s = state_index({r, c});
      if (s < 0)
        out += '#';
      else if (goal_mask_[s])
        out += 'G';
      else if (hallway_mask_[s])
        out += 'H';
      else
        out += '.';
    }
    out += '\n';
  }
  return out;
}

bool Grid::same_layout(const Grid& other) const {
  return width_ == other.width_ && height_ == other.height_ && walls_ == other.walls_ &&
         free_cells_ == other.free_cells_ && hallways_ == other.hallways_;
}

Grid build_four_rooms() { return Grid::parse(kFourRoomsMap); }
Grid build_tmaze_grid() { return Grid::parse(kTMazeMap); }

bool in_lower_right_room(Cell c) { return c.row > kEastWallRow && c.col > kVerticalWallCol; }

StateId reset(const Grid& grid, Rng& rng) {
  const int n = grid.num_states() - static_cast<int>(grid.goals().size());
  std::uniform_int_distribution<int> pick(0, n - 1);
  int k = pick(rng);
  // Map the k-th non-goal state onto a state index; goals are sorted.
  for (StateId g : grid.goals()) {
    if (g.index <= k) ++k;
  }
  return StateId{k};
}

StepOutcome step(const Grid& grid, StateId s, Action a) {
  StateId next = grid.neighbor(s, a);
  bool goal = grid.is_goal(next);
  return {next, goal ? 1.0 : 0.0, goal};
}

StepOutcome step_with_slip(const Grid& grid, StateId s, Action a, double slip, Rng& rng) {
  if (slip <= 0.0) return step(grid, s, a);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) >= slip) return step(grid, s, a);
  std::array<StateId, kNumActions> open{};
  std::size_t n = 0;
  for (int b = 0; b < kNumActions; ++b) {
    StateId next = grid.neighbor(s, static_cast<Action>(b));
    if (next != s) open[n++] = next;
  }
  if (n == 0) return step(grid, s, a);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  StateId next = open[pick(rng)];
  bool goal = grid.is_goal(next);
  return {next, goal ? 1.0 : 0.0, goal};
}

Grid relocate_goal(const Grid& grid, const std::function<bool(Cell)>& region, Rng& rng) {
  std::vector<StateId> candidates;
  for (int s = 0; s < grid.num_states(); ++s)
    if (region(grid.cell(StateId{s}))) candidates.push_back(StateId{s});
  if (candidates.empty()) throw ConfigError("relocate_goal: region contains no free cell");
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  return grid.with_goals({candidates[pick(rng)]});
}

}  // namespace optdiverse
