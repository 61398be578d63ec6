#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace namo::tools {

// Static SVG figure of a plan dump (scenario + graph + path) or of a trace
// (scenario + executed trajectory + obstacle displacements). Throws on
// unreadable input.
std::string render_plan(const nlohmann::json& plan_dump);
std::string render_trace(const std::filesystem::path& trace_file);
std::string render_file(const std::filesystem::path& input);

}  // namespace namo::tools
