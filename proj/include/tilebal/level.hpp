#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Tile vocabulary and the rectangular level grid shared by the generator, the
// swap environments and the match simulator.
//
// Level text format (canonical form produced by serialize_level):
//
//   <width> <height>\n
//   <row 0: width single-character tile codes>\n
//   ...
//   <row height-1>\n
//
// Tile codes: G=Grass  F=Forest  C=Scrub  S=Stone  W=Water  P=PlayerSpawn.
// parse_level is forgiving: the header line is optional (dimensions are then
// inferred from the grid lines) and spaces inside rows are ignored, so the
// output of render_ascii parses back to the same level.
//
// JSON form (used in datasets): {"width": w, "height": h, "cells": [ids...]}
// with cells row-major and ids equal to the integer value of TileKind.

namespace tilebal {

enum class TileKind : std::uint8_t {
  Grass = 0,
  Forest = 1,
  Scrub = 2,
  Stone = 3,
  Water = 4,
  PlayerSpawn = 5,
};

inline constexpr int kTileKindCount = 6;

inline constexpr std::array<TileKind, kTileKindCount> kAllTileKinds = {
    TileKind::Grass, TileKind::Forest, TileKind::Scrub,
    TileKind::Stone, TileKind::Water,  TileKind::PlayerSpawn,
};

/// Players can stand on everything except stone and water.
constexpr bool passable(TileKind kind) {
  return kind != TileKind::Stone && kind != TileKind::Water;
}

constexpr char tile_code(TileKind kind) {
  constexpr char codes[kTileKindCount] = {'G', 'F', 'C', 'S', 'W', 'P'};
  return codes[static_cast<int>(kind)];
}

const char* tile_name(TileKind kind);

std::optional<TileKind> tile_from_code(char code);

struct Position {
  int row = 0;
  int col = 0;

  bool operator==(const Position&) const = default;
};

/// Rectangular grid of tiles, row-major.
class Level {
 public:
  Level() = default;

  Level(int width, int height, std::vector<TileKind> cells);

  /// A width x height level filled with one tile kind.
  static Level filled(int width, int height, TileKind kind);

  int width() const { return width_; }
  int height() const { return height_; }
  int cell_count() const { return width_ * height_; }

  bool in_bounds(Position p) const {
    return p.row >= 0 && p.row < height_ && p.col >= 0 && p.col < width_;
  }

  int index(Position p) const { return p.row * width_ + p.col; }

  TileKind at(Position p) const { return cells_[index(p)]; }
  TileKind& at(Position p) { return cells_[index(p)]; }

  const std::vector<TileKind>& cells() const { return cells_; }

  void swap_cells(Position a, Position b);

  /// Positions of all cells of the given kind, row-major order.
  std::vector<Position> find_all(TileKind kind) const;

  bool operator==(const Level&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<TileKind> cells_;
};

/// Error raised by parse_level, carrying the 1-based offending coordinates.
class ParseError : public std::invalid_argument {
 public:
  ParseError(int line, int column, const std::string& what);

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

using TileHistogram = std::array<int, kTileKindCount>;

/// Per-kind cell counts; entries sum to width*height.
TileHistogram count_tiles(const Level& level);

/// True iff a 4-neighborhood path over passable tiles connects a and b.
/// a == b counts as connected. Out-of-bounds endpoints are an input error.
bool path_exists(const Level& level, Position a, Position b);

Level parse_level(const std::string& text);
std::string serialize_level(const Level& level);

/// Display form: one tile code per cell, cells separated by spaces, one line
/// per row. The overload wraps the given positions in brackets, e.g. "[S]".
std::string render_ascii(const Level& level);
std::string render_ascii(const Level& level, std::span<const Position> highlights);

}  // namespace tilebal
