#pragma once

#include <string>

#include "helios/workflow.hpp"

namespace helios {

// Workflow file: {"nodes":[{"id","kind","args"}...], "edges":[{"from","to","slot"}...],
// "outputs":[ids]}. LLM args: {"messages":[{"role","parts":[{"text":..}|{"ref":id}]}],
// "deterministic":bool}. Edges for llm refs may be omitted; they are derived in
// ref order when absent and checked for agreement when present.
WorkflowGraph parse_workflow(const std::string& json_text);
std::string serialize_workflow(const WorkflowGraph& g);

WorkflowGraph load_workflow(const std::string& path);
void save_workflow(const WorkflowGraph& g, const std::string& path);

// Inputs file: {"name": ["text", {"token_count": N}, ...], ...}
InputBatch parse_inputs(const std::string& json_text);
std::string serialize_inputs(const InputBatch& in);
InputBatch load_inputs(const std::string& path);
void save_inputs(const InputBatch& in, const std::string& path);

// Profile file: {"<llm node id>": {"len_out": N}, ...}
ProfileStats parse_profile(const std::string& json_text);
std::string serialize_profile(const ProfileStats& p);
ProfileStats load_profile(const std::string& path);
void save_profile(const ProfileStats& p, const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace helios
