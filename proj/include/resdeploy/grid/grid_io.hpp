#pragma once

#include <filesystem>
#include <optional>

#include "json.hpp"
#include "resdeploy/grid/grid_model.hpp"

namespace resdeploy::grid {

// Reads nodes.csv, lines.csv and generators.csv from `dir`.
GridModel load_grid_csv(const std::filesystem::path& dir, std::optional<int> slack_override = std::nullopt);

// Reads the single-document JSON form.
GridModel load_grid_json(const std::filesystem::path& file, std::optional<int> slack_override = std::nullopt);

// Dispatches on the path: a directory is read as the CSV trio, a file as JSON.
GridModel load_grid(const std::filesystem::path& path, std::optional<int> slack_override = std::nullopt);

nlohmann::ordered_json grid_to_json(const GridModel& grid);
GridModel grid_from_json(const nlohmann::json& doc, const std::string& source,
                         std::optional<int> slack_override = std::nullopt);

void write_grid_csv(const GridModel& grid, const std::filesystem::path& dir);

}  // namespace resdeploy::grid
