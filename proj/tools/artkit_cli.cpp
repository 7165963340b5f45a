// artkit command line: compile, eval, retrieve, run, report, render.
// Exit codes: 0 success, 1 pipeline failure, 2 invalid input.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "artkit/aggregate.hpp"
#include "artkit/artlang.hpp"
#include "artkit/asset_library.hpp"
#include "artkit/compiler.hpp"
#include "artkit/config.hpp"
#include "artkit/evaluate.hpp"
#include "artkit/obj.hpp"
#include "artkit/pipeline.hpp"
#include "artkit/render.hpp"
#include "artkit/urdf.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace artkit;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kInvalid = 2;

struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

// ---- compile ----

struct CompileArgs {
  std::string program, output, library, name = "model";
  std::vector<std::string> search;
};

int cmd_compile(const CompileArgs& a) {
  ArtProgram program = parse_artlang(read_file(a.program));
  CompileOptions opts;
  opts.model_name = a.name;
  opts.search_dirs.push_back(fs::path(a.program).parent_path());
  for (const auto& s : a.search) opts.search_dirs.emplace_back(s);
  if (!a.output.empty() && a.output != "-") opts.output_dir = fs::path(a.output).parent_path();
  if (opts.output_dir.empty() && !a.output.empty() && a.output != "-") opts.output_dir = ".";
  CompileResult r = a.library.empty() ? compile(program, opts) : compile(program, AssetLibrary::load(a.library), opts);
  for (const auto& [loc, msg] : r.diagnostics.warnings) std::cerr << a.program << ":" << to_string(loc) << ": warning: " << msg << '\n';
  write_output(a.output, emit_urdf(r.model));
  return kOk;
}

// ---- eval ----

struct EvalArgs {
  std::string pred, gt, match = "name", format = "text", output, pose_mode = "frame";
  bool no_chamfer = false, require_success = false;
  double pos = 0.050, ang = 0.25, range = 0.050, dir = 0.25;
  std::size_t samples = 2048;
};

int cmd_eval(const EvalArgs& a) {
  const UrdfModel gt = load_urdf(a.gt);
  EvalConfig cfg;
  cfg.position_threshold = a.pos;
  cfg.angular_threshold = a.ang;
  cfg.limit_range_threshold = a.range;
  cfg.limit_direction_threshold = a.dir;
  cfg.chamfer_samples = a.samples;
  try {
    cfg.validate();
  } catch (const EvalError& e) {
    throw InvalidInput(e.what());
  }
  MeshCache cache;
  EvalReport report;
  try {
    const UrdfModel pred = load_urdf(a.pred);
    const LinkMatching m = a.match == "chamfer" ? match_by_chamfer(pred, gt, cfg, cache) : match_by_name(pred, gt);
    EvalOptions opts;
    opts.compute_chamfer = !a.no_chamfer;
    opts.pose_mode = a.pose_mode == "centroid" ? LinkPoseMode::centroid : LinkPoseMode::frame;
    report = evaluate(pred, gt, m, cfg, cache, opts);
  } catch (const UrdfError& e) {
    // An unparseable prediction is an evaluation outcome, not a usage error.
    report = invalid_report(gt.name, e.what(), gt);
  }
  const std::string text = a.format == "structured" ? report_to_json(report)
                           : a.format == "csv"      ? report_to_csv(report)
                                                    : report_to_text(report);
  write_output(a.output, text);
  if (a.require_success && !(report.object_link_success && report.object_joint_success)) return kFailure;
  return kOk;
}

// ---- retrieve / run ----

RunConfig config_or_die(const std::string& path) {
  if (path.empty()) throw InvalidInput("--config is required (agents and embedder are configured there)");
  try {
    return load_run_config(path);
  } catch (const ConfigError& e) {
    throw InvalidInput(e.what());
  }
}

struct RetrieveArgs {
  std::string input, library, config, modality, output;
};

int cmd_retrieve(const RetrieveArgs& a) {
  const AssetLibrary library = AssetLibrary::load(a.library);
  RunConfig rc = config_or_die(a.config);
  if (!rc.embedder) throw InvalidInput("config has no embedder");
  std::string modality = a.modality;
  if (modality.empty()) modality = fs::is_directory(a.input) ? "video" : (fs::exists(a.input) && fs::path(a.input).extension() != ".txt" ? "image" : "text");
  nlohmann::json out;
  if (modality == "text") {
    const std::string prompt = fs::exists(a.input) ? read_file(a.input) : a.input;
    const TaskPlan plan = specify_task(prompt, *rc.agent, rc.pipeline.loop.max_retries);
    out["description"] = plan.description;
    out["parts"] = nlohmann::json::array();
    for (const auto& m : match_parts_by_text(plan.parts, library, rc.embedder)) {
      out["parts"].push_back({{"part", m.part}, {"object_id", m.object_id}, {"library_part", m.library_part},
                              {"mesh", m.mesh_ref}, {"similarity", m.similarity}});
    }
  } else {
    fs::path first = a.input;
    if (fs::is_directory(first)) {
      const auto frames = list_frames(first);
      if (frames.empty()) throw InvalidInput("no image frames in " + a.input);
      first = frames.front();
    }
    const auto vr = retrieve_visual(image_from_file(first), image_query_key(read_file(first)), library, rc.embedder,
                                    *rc.agent, rc.pipeline.retrieval, rc.pipeline.max_parallel);
    out["categories"] = nlohmann::json::array();
    for (const auto& c : vr.categories) out["categories"].push_back({{"category", c.category}, {"similarity", c.similarity}});
    out["candidates"] = vr.candidates;
    out["winner"] = vr.tournament.winner;
    out["selector_calls"] = vr.tournament.selector_calls;
  }
  if (rc.recorder && rc.transcript_path) rc.recorder->save(*rc.transcript_path);
  write_output(a.output, out.dump(2) + "\n");
  return kOk;
}

struct RunArgs {
  std::string input, modality = "image", library, gt, config, output = "bundle";
  bool target_affordance = false;
};

int cmd_run(const RunArgs& a) {
  const auto modality = modality_from_string(a.modality);
  if (!modality) throw InvalidInput("unknown modality '" + a.modality + "'");
  const AssetLibrary library = AssetLibrary::load(a.library);
  RunConfig rc = config_or_die(a.config);
  if (!rc.embedder) throw InvalidInput("config has no embedder");
  PipelineInput in;
  in.modality = *modality;
  if (*modality == Modality::text && !fs::exists(a.input)) in.text = a.input;
  else in.path = a.input;
  if (*modality != Modality::text && !fs::exists(in.path)) throw InvalidInput("input " + a.input + " does not exist");
  if (!a.gt.empty()) {
    if (!fs::exists(a.gt)) throw InvalidInput("ground truth " + a.gt + " does not exist");
    in.ground_truth = a.gt;
  }
  rc.pipeline.target_affordance = a.target_affordance;
  const PipelineResult r = run_pipeline(in, library, *rc.agent, rc.embedder, rc.pipeline, a.output);
  if (rc.recorder && rc.transcript_path) rc.recorder->save(*rc.transcript_path);
  for (const auto& s : r.stages) {
    std::cerr << s.name << ": " << s.status << (s.error.empty() ? "" : " (" + s.error + ")") << '\n';
  }
  if (r.report) std::cout << report_to_text(*r.report);
  std::cout << "bundle: " << r.bundle.string() << '\n';
  return r.ok() ? kOk : kFailure;
}

// ---- report ----

struct ReportArgs {
  std::string dir, format = "text", output, critic;
};

int cmd_report(const ReportArgs& a) {
  if (!fs::is_directory(a.dir)) throw InvalidInput(a.dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a.dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<EvalReport> reports;
  for (const auto& f : files) {
    const std::string text = read_file(f);
    if (text.find(kReportSchema) == std::string::npos) continue;
    try {
      reports.push_back(report_from_json(text));
    } catch (const EvalError& e) {
      throw InvalidInput(f.string() + ": " + e.what());
    }
  }
  if (reports.empty()) throw InvalidInput("no evaluation reports under " + a.dir);
  const AggregateStats stats = aggregate(reports);
  std::string text = a.format == "structured" ? stats_to_json(stats) : stats_to_text(stats);
  if (!a.critic.empty()) {
    const auto doc = nlohmann::json::parse(read_file(a.critic));
    ConfusionMatrix m;
    try {
      m = critic_agreement(doc.at("critic").get<std::vector<bool>>(), doc.at("ground_truth").get<std::vector<bool>>());
    } catch (const EvalError& e) {
      throw InvalidInput(e.what());
    }
    std::ostringstream s;
    s << "critic agreement: tp " << m.tp << ", fp " << m.fp << ", fn " << m.fn << ", tn " << m.tn << ", accuracy "
      << m.accuracy << '\n';
    text += s.str();
  }
  write_output(a.output, text);
  return kOk;
}

// ---- render ----

struct RenderArgs {
  std::string urdf, joints, camera = "iso", output = "render.png", sweep, external;
  bool segmented = false;
  int size = 256, frames = 6;
};

int cmd_render(const RenderArgs& a) {
  const UrdfModel model = load_urdf(a.urdf);
  const auto camera = camera_from_string(a.camera);
  if (!camera) throw InvalidInput("unknown camera '" + a.camera + "'");
  RenderOptions o;
  o.width = o.height = a.size;
  o.camera = *camera;
  o.mode = a.segmented ? RenderMode::segmented : RenderMode::shaded;
  MeshCache cache;
  JointValues values;
  if (!a.joints.empty()) {
    try {
      values = joint_values_from_json(read_file(a.joints));
    } catch (const RenderError& e) {
      throw InvalidInput(e.what());
    }
  }
  if (!a.external.empty()) {
    const fs::path jf = fs::path(a.output).concat(".joints.json");
    std::ofstream(jf) << joint_values_to_json(values);
    render_external(a.external, a.urdf, jf, *camera, a.output);
    fs::remove(jf);
    return kOk;
  }
  if (a.sweep.empty()) {
    write_png(a.output, render_model(model, values, o, cache));
    return kOk;
  }
  // Sweep: output names a directory of numbered frames.
  std::vector<JointValues> configs = joint_sweep(model, a.sweep, a.frames);
  for (auto& c : configs) c.insert(values.begin(), values.end());
  o.framing = model_bounds(model, configs, cache);
  fs::create_directories(a.output);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.png", i);
    write_png(fs::path(a.output) / name, render_model(model, configs[i], o, cache));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"artkit: articulated object modeling toolkit"};
  app.require_subcommand(1);

  CompileArgs ca;
  auto* c = app.add_subcommand("compile", "Compile an ArtLang program to URDF");
  c->add_option("program", ca.program, "ArtLang source")->required();
  c->add_option("-o,--output", ca.output, "Output URDF (default stdout)");
  c->add_option("--library", ca.library, "Asset library manifest for mesh lookup");
  c->add_option("--search", ca.search, "Extra mesh search directories");
  c->add_option("--name", ca.name, "Model name");

  EvalArgs ea;
  auto* e = app.add_subcommand("eval", "Compare a predicted URDF against ground truth");
  e->add_option("pred", ea.pred, "Predicted URDF")->required();
  e->add_option("gt", ea.gt, "Ground-truth URDF")->required();
  e->add_option("--match", ea.match, "Link matching")->check(CLI::IsMember({"name", "chamfer"}));
  e->add_option("--format", ea.format, "Output format")->check(CLI::IsMember({"text", "structured", "csv"}));
  e->add_option("--pose-mode", ea.pose_mode, "Link pose")->check(CLI::IsMember({"frame", "centroid"}));
  e->add_option("-o,--output", ea.output, "Output file (default stdout)");
  e->add_option("--position-threshold", ea.pos, "meters");
  e->add_option("--angular-threshold", ea.ang, "radians");
  e->add_option("--limit-range-threshold", ea.range);
  e->add_option("--limit-direction-threshold", ea.dir);
  e->add_option("--chamfer-samples", ea.samples, "points per link");
  e->add_flag("--no-chamfer", ea.no_chamfer, "Skip mesh distances");
  e->add_flag("--require-success", ea.require_success, "Exit 1 unless every link and joint succeeds");

  RetrieveArgs ra;
  auto* r = app.add_subcommand("retrieve", "Retrieve library meshes for an input");
  r->add_option("--input", ra.input, "Frame directory, image, text file or prompt")->required();
  r->add_option("--library", ra.library, "Library manifest")->required();
  r->add_option("--config", ra.config, "Run config (agents, embedder)");
  r->add_option("--modality", ra.modality, "text|image|video (default: inferred)");
  r->add_option("-o,--output", ra.output, "Output file (default stdout)");

  RunArgs ua;
  auto* u = app.add_subcommand("run", "Run the full pipeline and write an output bundle");
  u->add_option("--input", ua.input, "Prompt text/file, image, or frame directory")->required();
  u->add_option("--modality", ua.modality, "Input modality")->check(CLI::IsMember({"text", "image", "video"}));
  u->add_option("--library", ua.library, "Library manifest")->required();
  u->add_option("--gt", ua.gt, "Ground-truth URDF to evaluate against");
  u->add_option("--config", ua.config, "Run config (agents, embedder, loop settings)");
  u->add_option("-o,--output", ua.output, "Bundle directory");
  u->add_flag("--target-affordance", ua.target_affordance, "Ask which part moves before the joint loop");

  ReportArgs pa;
  auto* p = app.add_subcommand("report", "Aggregate evaluation reports under a directory");
  p->add_option("results", pa.dir, "Directory searched recursively for reports")->required();
  p->add_option("--format", pa.format, "Output format")->check(CLI::IsMember({"text", "structured"}));
  p->add_option("--critic", pa.critic, "JSON with critic and ground_truth verdict lists");
  p->add_option("-o,--output", pa.output, "Output file (default stdout)");

  RenderArgs da;
  auto* d = app.add_subcommand("render", "Render a URDF to PNG");
  d->add_option("urdf", da.urdf, "Model")->required();
  d->add_option("--joints", da.joints, "JSON object of joint values");
  d->add_flag("--segmented", da.segmented, "One flat color per link on black");
  d->add_option("--camera", da.camera, "front|back|left|right|top|iso");
  d->add_option("--size", da.size, "Image side in pixels");
  d->add_option("--sweep", da.sweep, "Joint to sweep; output becomes a frame directory");
  d->add_option("--frames", da.frames, "Frames per sweep");
  d->add_option("--external", da.external, "External renderer command");
  d->add_option("-o,--output", da.output, "Output PNG (or directory with --sweep)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*c) return cmd_compile(ca);
    if (*e) return cmd_eval(ea);
    if (*r) return cmd_retrieve(ra);
    if (*u) return cmd_run(ua);
    if (*p) return cmd_report(pa);
    if (*d) return cmd_render(da);
  } catch (const InvalidInput& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kInvalid;
  } catch (const UrdfError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kInvalid;
  } catch (const ArtlangError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kInvalid;
  } catch (const ObjError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kInvalid;
  } catch (const LibraryError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kInvalid;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kFailure;
  }
  return kInvalid;
}
