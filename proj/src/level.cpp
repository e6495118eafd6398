#include "tilebal/level.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>
#include <utility>

namespace tilebal {

const char* tile_name(TileKind kind) {
  switch (kind) {
    case TileKind::Grass: return "grass";
    case TileKind::Forest: return "forest";
    case TileKind::Scrub: return "scrub";
    case TileKind::Stone: return "stone";
    case TileKind::Water: return "water";
    case TileKind::PlayerSpawn: return "player";
  }
  return "?";
}

std::optional<TileKind> tile_from_code(char code) {
  for (TileKind kind : kAllTileKinds) {
    if (tile_code(kind) == code) return kind;
  }
  return std::nullopt;
}

Level::Level(int width, int height, std::vector<TileKind> cells)
    : width_(width), height_(height), cells_(std::move(cells)) {
  if (width_ < 1 || height_ < 1) {
    throw std::invalid_argument("level dimensions must be positive");
  }
  if (static_cast<int>(cells_.size()) != width_ * height_) {
    throw std::invalid_argument("level cell count does not match width*height");
  }
}

Level Level::filled(int width, int height, TileKind kind) {
  return Level(width, height, std::vector<TileKind>(static_cast<size_t>(width) * height, kind));
}

void Level::swap_cells(Position a, Position b) {
  if (!in_bounds(a) || !in_bounds(b)) {
    throw std::invalid_argument("swap position out of bounds");
  }
  std::swap(cells_[index(a)], cells_[index(b)]);
}

std::vector<Position> Level::find_all(TileKind kind) const {
  std::vector<Position> out;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (cells_[r * width_ + c] == kind) out.push_back({r, c});
    }
  }
  return out;
}

ParseError::ParseError(int line, int column, const std::string& what)
    : std::invalid_argument("line " + std::to_string(line) + ", column " +
                            std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

TileHistogram count_tiles(const Level& level) {
  TileHistogram counts{};
  for (TileKind kind : level.cells()) counts[static_cast<int>(kind)] += 1;
  return counts;
}

bool path_exists(const Level& level, Position a, Position b) {
  if (!level.in_bounds(a) || !level.in_bounds(b)) {
    throw std::invalid_argument("path_exists: position out of bounds");
  }
  if (!passable(level.at(a)) || !passable(level.at(b))) return false;
  if (a == b) return true;

  std::vector<char> seen(static_cast<size_t>(level.cell_count()), 0);
  std::deque<Position> queue;
  queue.push_back(a);
  seen[level.index(a)] = 1;
  static constexpr int kDr[4] = {-1, 0, 1, 0};  // N, E, S, W
  static constexpr int kDc[4] = {0, 1, 0, -1};
  while (!queue.empty()) {
    Position p = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; ++d) {
      Position q{p.row + kDr[d], p.col + kDc[d]};
      if (!level.in_bounds(q) || seen[level.index(q)] || !passable(level.at(q))) continue;
      if (q == b) return true;
      seen[level.index(q)] = 1;
      queue.push_back(q);
    }
  }
  return false;
}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (char ch : text) {
    if (ch == '\n') {
      lines.push_back(current);
      current.clear();
    } else if (ch != '\r') {
      current.push_back(ch);
    }
  }
  if (!current.empty()) lines.push_back(current);
  return lines;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char ch) { return std::isspace(ch); });
}

}  // namespace

Level parse_level(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);

  size_t first = 0;
  while (first < lines.size() && is_blank(lines[first])) ++first;
  if (first == lines.size()) throw ParseError(1, 1, "empty level text");

  // A leading line that starts with a digit is the "<width> <height>" header.
  int declared_width = -1;
  int declared_height = -1;
  size_t grid_start = first;
  if (std::isdigit(static_cast<unsigned char>(lines[first][lines[first].find_first_not_of(' ')]))) {
    std::istringstream header(lines[first]);
    std::string trailing;
    if (!(header >> declared_width >> declared_height) || (header >> trailing)) {
      throw ParseError(static_cast<int>(first) + 1, 1,
                       "header must be '<width> <height>'");
    }
    if (declared_width < 1 || declared_height < 1) {
      throw ParseError(static_cast<int>(first) + 1, 1,
                       "level dimensions must be positive");
    }
    grid_start = first + 1;
  }

  std::vector<TileKind> cells;
  int width = -1;
  int rows = 0;
  for (size_t li = grid_start; li < lines.size(); ++li) {
    const std::string& line = lines[li];
    if (is_blank(line)) {
      if (li + 1 < lines.size() && !is_blank(lines[li + 1])) {
        throw ParseError(static_cast<int>(li) + 1, 1, "blank line inside grid");
      }
      break;
    }
    int row_width = 0;
    for (size_t ci = 0; ci < line.size(); ++ci) {
      const char ch = line[ci];
      if (ch == ' ' || ch == '\t') continue;
      const auto kind = tile_from_code(ch);
      if (!kind) {
        throw ParseError(static_cast<int>(li) + 1, static_cast<int>(ci) + 1,
                         std::string("unknown tile code '") + ch + "'");
      }
      cells.push_back(*kind);
      ++row_width;
    }
    if (width < 0) {
      width = row_width;
    } else if (row_width != width) {
      throw ParseError(static_cast<int>(li) + 1, 1,
                       "ragged row: expected " + std::to_string(width) +
                           " tiles, got " + std::to_string(row_width));
    }
    ++rows;
  }
  if (rows == 0 || width == 0) {
    throw ParseError(static_cast<int>(grid_start) + 1, 1, "no grid rows");
  }

  if (declared_width >= 0 && (declared_width != width || declared_height != rows)) {
    throw ParseError(static_cast<int>(first) + 1, 1,
                     "size mismatch: header says " + std::to_string(declared_width) +
                         "x" + std::to_string(declared_height) + ", grid is " +
                         std::to_string(width) + "x" + std::to_string(rows));
  }
  return Level(width, rows, std::move(cells));
}

std::string serialize_level(const Level& level) {
  std::string out = std::to_string(level.width()) + " " + std::to_string(level.height()) + "\n";
  for (int r = 0; r < level.height(); ++r) {
    for (int c = 0; c < level.width(); ++c) {
      out.push_back(tile_code(level.at({r, c})));
    }
    out.push_back('\n');
  }
  return out;
}

std::string render_ascii(const Level& level) {
  return render_ascii(level, std::span<const Position>{});
}

std::string render_ascii(const Level& level, std::span<const Position> highlights) {
  std::string out;
  for (int r = 0; r < level.height(); ++r) {
    for (int c = 0; c < level.width(); ++c) {
      if (c > 0) out.push_back(' ');
      const bool marked =
          std::any_of(highlights.begin(), highlights.end(),
                      [&](Position p) { return p == Position{r, c}; });
      if (marked) out.push_back('[');
      out.push_back(tile_code(level.at({r, c})));
      if (marked) out.push_back(']');
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace tilebal
