#include "artkit/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "artkit/obj.hpp"
#include "artkit/urdf.hpp"
#include "json.hpp"

namespace artkit {

namespace fs = std::filesystem;
using nlohmann::json;

bool PipelineResult::ok() const {
  for (const auto& s : stages) {
    if (s.status == "failed") return false;
  }
  return true;
}

VisualRetrieval retrieve_visual(const ImageData& query, const std::string& query_key, const AssetLibrary& library,
                                const Embedder& embedder, Agent& agent, const RetrievalConfig& cfg,
                                std::size_t max_parallel) {
  std::vector<float> q;
  try {
    q = embedder(query_key);
  } catch (const std::exception& e) {
    throw RetrievalError(RetrievalError::Code::embedder_failure, std::string("embedding the query failed: ") + e.what());
  }
  VisualRetrieval out;
  out.categories = top_k_categories(q, library, cfg.top_k_categories);
  for (const auto& c : out.categories) {
    for (const auto& e : library.categories().find(c.category)->second) out.candidates.push_back(e.object_id);
  }
  const Selector selector = [&](std::span<const std::string> batch) {
    std::vector<ImageData> images{query};
    std::string list;
    for (const auto& id : batch) {
      list += (list.empty() ? "" : ", ") + id;
      const AssetEntry* e = library.find_object(id);
      if (e != nullptr && !e->images.empty()) images.push_back(image_from_file(library.root_dir() / e->images.front()));
    }
    AgentRequest req{"selector", {Message{"user", fill_template(prompt_template("selector"), {{"candidates", list}}),
                                          std::move(images)}}};
    return parse_selection(agent.complete(req).text, batch);
  };
  out.tournament = tournament_select(out.candidates, cfg.max_num_images, selector, max_parallel);
  return out;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

/// Clears a previous bundle; refuses to touch a directory that is not one.
void prepare_bundle_dir(const fs::path& dir) {
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    const fs::path manifest = dir / "manifest.json";
    bool is_bundle = false;
    if (fs::exists(manifest)) {
      try {
        is_bundle = json::parse(read_file(manifest)).value("schema", "") == kBundleSchema;
      } catch (const std::exception&) {
      }
    }
    if (!is_bundle) throw std::runtime_error(dir.string() + " exists and is not an output bundle");
    for (const char* name : {"manifest.json", "model.urdf", "program.art", "eval_report.json"}) fs::remove(dir / name);
    for (const char* name : {"meshes", "logs", "renders"}) fs::remove_all(dir / name);
  }
  fs::create_directories(dir);
}

std::string draft_program(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += "part " + p + " \"meshes/" + p + ".obj\";\n";
  return out;
}

json categories_json(const std::vector<CategoryScore>& cats) {
  json arr = json::array();
  for (const auto& c : cats) {
    arr.push_back({{"category", c.category}, {"similarity", c.similarity}, {"best_object", c.best_object}});
  }
  return arr;
}

}  // namespace

PipelineResult run_pipeline(const PipelineInput& input, const AssetLibrary& library, Agent& agent,
                            const Embedder& embedder, const PipelineConfig& cfg, const fs::path& out_dir) {
  prepare_bundle_dir(out_dir);
  PipelineResult result;
  result.bundle = out_dir;
  MeshCache cache;
  LoopConfig loop_cfg = cfg.loop;
  loop_cfg.modality = input.modality;

  bool failed = false;
  auto stage = [&](const std::string& name, const std::function<void()>& body) {
    if (failed) {
      result.stages.push_back({name, "skipped", ""});
      return;
    }
    try {
      body();
      result.stages.push_back({name, "ok", ""});
    } catch (const std::exception& e) {
      result.stages.push_back({name, "failed", e.what()});
      failed = true;
    }
  };
  auto write_renders = [&](const std::vector<Iteration>& log) {
    for (const auto& it : log) {
      for (const auto& r : it.renders) write_file(out_dir / "renders" / r.name, r.png);
    }
  };

  LoopInput li;
  ImageData query;
  std::string query_key;
  stage("intake", [&] {
    switch (input.modality) {
      case Modality::text:
        li.task = input.path.empty() ? input.text : read_file(input.path);
        if (li.task.find_first_not_of(" \t\r\n") == std::string::npos) throw std::runtime_error("text prompt is empty");
        break;
      case Modality::image: {
        const std::string bytes = read_file(input.path);
        query = image_from_file(input.path);
        query_key = image_query_key(bytes);
        li.frames = {query};
        li.task = "reproduce the articulated object shown in the image";
        break;
      }
      case Modality::video: {
        if (!fs::is_directory(input.path)) throw std::runtime_error(input.path.string() + " is not a frame directory");
        const auto frames = subsample_frames(list_frames(input.path), loop_cfg.max_frames);
        if (frames.empty()) throw std::runtime_error("no image frames in " + input.path.string());
        for (const auto& f : frames) li.frames.push_back(image_from_file(f));
        query = li.frames.front();
        query_key = image_query_key(read_file(frames.front()));
        li.task = "reproduce the articulated object moving in the video frames";
        break;
      }
    }
  });

  std::string draft;
  std::string model_name = "model";
  stage("retrieval", [&] {
    json log;
    std::vector<std::string> names;
    if (input.modality == Modality::text) {
      const TaskPlan plan = specify_task(li.task, agent, loop_cfg.max_retries);
      li.task = plan.description;
      const auto matches = match_parts_by_text(plan.parts, library, embedder);
      json parts = json::array();
      for (std::size_t i = 0; i < matches.size(); ++i) {
        const auto& m = matches[i];
        auto [mesh, scale] = rescale_mesh(*cache.load(library.root_dir() / m.mesh_ref), plan.parts[i].dimensions);
        write_file(out_dir / "meshes" / (m.part + ".obj"), emit_obj(mesh));
        names.push_back(m.part);
        parts.push_back({{"part", m.part},
                         {"description", plan.parts[i].description},
                         {"dimensions", {plan.parts[i].dimensions.x, plan.parts[i].dimensions.y, plan.parts[i].dimensions.z}},
                         {"object_id", m.object_id},
                         {"library_part", m.library_part},
                         {"mesh", m.mesh_ref},
                         {"similarity", m.similarity},
                         {"scale", {scale.x, scale.y, scale.z}}});
      }
      log = {{"mode", "text"}, {"description", plan.description}, {"parts", parts}};
    } else {
      const VisualRetrieval vr = retrieve_visual(query, query_key, library, embedder, agent, cfg.retrieval,
                                                 cfg.max_parallel);
      const AssetEntry* winner = library.find_object(vr.tournament.winner);
      json parts = json::array();
      for (const auto& p : winner->parts) {
        write_file(out_dir / "meshes" / (p.name + ".obj"), emit_obj(*cache.load(library.root_dir() / p.mesh)));
        names.push_back(p.name);
        parts.push_back({{"part", p.name}, {"mesh", p.mesh}});
      }
      model_name = winner->object_id;
      log = {{"mode", "visual"},
             {"query", query_key},
             {"categories", categories_json(vr.categories)},
             {"candidates", vr.candidates},
             {"rounds", vr.tournament.rounds},
             {"selector_calls", vr.tournament.selector_calls},
             {"winner", vr.tournament.winner},
             {"parts", parts}};
    }
    log["schema"] = "artkit.retrieval_log/1";
    write_file(out_dir / "logs" / "retrieval.json", log.dump(2) + "\n");
    draft = draft_program(names);
  });

  LoopEnv env;
  env.compile.model_name = model_name;
  env.compile.search_dirs = {out_dir};
  env.compile.output_dir = out_dir;
  env.renderer = builtin_renderer(cache);
  if (!cfg.external_renderer.empty()) {
    const fs::path scratch = out_dir / ".render";
    env.renderer = [&cfg, scratch](const UrdfModel& model, const JointValues& values, const RenderOptions& o) {
      fs::create_directories(scratch);
      UrdfModel copy = model;
      for (auto& l : copy.links) {
        if (!l.mesh_path.empty() && fs::path(l.mesh_path).is_relative()) {
          l.mesh_path = fs::absolute(model.base_dir / l.mesh_path).generic_string();
        }
      }
      save_urdf(copy, scratch / "model.urdf");
      write_file(scratch / "joints.json", joint_values_to_json(values));
      Image img = render_external(cfg.external_renderer, scratch / "model.urdf", scratch / "joints.json", o.camera,
                                  scratch / "out.png");
      return img;
    };
  }

  std::optional<LoopResult> link_result, joint_result;
  stage("link_loop", [&] {
    const bool use_critic = input.modality != Modality::text || cfg.critic_for_text;
    try {
      link_result = run_link_loop(li, draft, agent, use_critic, loop_cfg, env);
    } catch (const LoopFailure& e) {
      write_renders(e.log());
      write_file(out_dir / "logs" / "link_loop.json", loop_log_json("link", e.log(), 0, false));
      throw;
    }
    write_renders(link_result->log);
    write_file(out_dir / "logs" / "link_loop.json",
               loop_log_json("link", link_result->log, link_result->best_iteration, link_result->converged));
  });

  std::optional<std::string> target;
  if (cfg.target_affordance) {
    stage("affordance", [&] {
      const auto a = extract_target_affordance(li, link_result->compiled.model, agent, env.renderer, loop_cfg);
      write_file(out_dir / "renders" / a.segmented.name, a.segmented.png);
      write_file(out_dir / "logs" / "affordance.json",
                 json{{"schema", "artkit.affordance_log/1"}, {"link", a.link}, {"attempts", a.attempts}, {"raw", a.raw}}
                         .dump(2) +
                     "\n");
      target = a.link;
    });
  }

  stage("joint_loop", [&] {
    try {
      joint_result = run_joint_loop(li, link_result->program_text, agent, target, loop_cfg, env);
    } catch (const LoopFailure& e) {
      write_renders(e.log());
      write_file(out_dir / "logs" / "joint_loop.json", loop_log_json("joint", e.log(), 0, false));
      throw;
    }
    write_renders(joint_result->log);
    write_file(out_dir / "logs" / "joint_loop.json",
               loop_log_json("joint", joint_result->log, joint_result->best_iteration, joint_result->converged));
  });

  // The furthest finished stage supplies the model.
  const LoopResult* final_result = joint_result ? &*joint_result : (link_result ? &*link_result : nullptr);
  if (final_result != nullptr) {
    write_file(out_dir / "program.art", final_result->program_text);
    write_file(out_dir / "model.urdf", emit_urdf(final_result->compiled.model));
  }

  if (input.ground_truth) {
    const bool was_failed = failed;
    failed = false;  // evaluation still scores whatever was produced
    stage("evaluate", [&] {
      const UrdfModel gt = load_urdf(*input.ground_truth);
      EvalReport report;
      if (final_result == nullptr) {
        report = invalid_report(gt.name, "pipeline produced no model", gt);
      } else {
        const UrdfModel& pred = final_result->compiled.model;
        const LinkMatching m = cfg.match_by_chamfer ? match_by_chamfer(pred, gt, cfg.eval, cache) : match_by_name(pred, gt);
        report = evaluate(pred, gt, m, cfg.eval, cache);
      }
      write_file(out_dir / "eval_report.json", report_to_json(report));
      result.report = report;
    });
    failed = failed || was_failed;
  } else {
    result.stages.push_back({"evaluate", "skipped", "no ground truth supplied"});
  }
  fs::remove_all(out_dir / ".render");

  json stages = json::array();
  for (const auto& s : result.stages) stages.push_back({{"name", s.name}, {"status", s.status}, {"error", s.error}});
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(out_dir)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.json") {
      files.push_back(e.path().lexically_relative(out_dir).generic_string());
    }
  }
  std::sort(files.begin(), files.end());
  const json manifest{{"schema", kBundleSchema},
                      {"modality", to_string(input.modality)},
                      {"input", input.path.empty() ? json(nullptr) : json(input.path.generic_string())},
                      {"ground_truth", input.ground_truth ? json(input.ground_truth->generic_string()) : json(nullptr)},
                      {"status", failed ? "failed" : "ok"},
                      {"stages", stages},
                      {"files", files}};
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

}  // namespace artkit
