#pragma once

// JSON and CSV persistence. Every file is written to a temporary sibling and
// renamed into place.

#include "mcfsing/flows.hpp"
#include "mcfsing/planes.hpp"
#include "mcfsing/spacetime.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace mcfsing {

using Json = nlohmann::ordered_json;

void write_text_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// {"points": [{"x": [...], "t": ...}, ...], "labels": [...]?}
Json to_json(const PointCloud& cloud);
PointCloud cloud_from_json(const Json& j);

Json to_json(const SpaceTimePoint& p);
SpaceTimePoint point_from_json(const Json& j);

Json to_json(const TimeSlicePlane& plane);
TimeSlicePlane plane_from_json(const Json& j);

Json to_json(const WeightedHypersurface& surface);
WeightedHypersurface surface_from_json(const Json& j);

Json to_json(const SingularEvent& event);
SingularEvent event_from_json(const Json& j);

/// Archive layout: <dir>/flow.json (metadata and pinch records),
/// <dir>/snapshots.json (time, spacing and surface of every snapshot),
/// <dir>/events.json when events are given.
void write_flow_archive(const std::filesystem::path& dir, const Flow& flow,
                        const std::vector<SingularEvent>* events = nullptr);
Flow read_flow_archive(const std::filesystem::path& dir);
std::vector<SingularEvent> read_events(const std::filesystem::path& dir);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string to_csv(const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Stable (insertion-ordered) serialization with full double precision.
std::string dump(const Json& j);

}  // namespace mcfsing
