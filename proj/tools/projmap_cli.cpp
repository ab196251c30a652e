#include <CLI11.hpp>

#include <iostream>

#include "projmap/commands.hpp"

int main(int argc, char** argv) {
  namespace cli = projmap::cli;

  CLI::App app{"Projector calibration, projection rendering and alignment verification"};
  app.require_subcommand(1);

  cli::CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Compute camera-info from jig measurements");
  calibrate->add_option("--measurements", cal.measurements, "Measurement YAML (Z W H X Y w h)")->required();
  calibrate->add_option("--out", cal.out, "Camera-info YAML to write")->required();

  cli::RenderArgs ren;
  auto* render = app.add_subcommand("render", "Render a scene from the projector pose");
  render->add_option("--scene", ren.scene, "Scene YAML")->required();
  render->add_option("--frames", ren.frames, "Frame tree YAML")->required();
  render->add_option("--camera-info", ren.camera_info, "Projector camera-info YAML")->required();
  render->add_option("--projector-frame", ren.projector_frame, "Projector optical frame")->required();
  render->add_option("--splat-radius", ren.splat_radius, "Point splat radius in pixels")
      ->capture_default_str();
  render->add_option("--out", ren.out, "Output image (.ppm or .png)")->required();

  cli::PathArgs pth;
  double band_width = 0;
  std::string ground_frame;
  auto* path = app.add_subcommand("path", "Render a ground-plane navigation path");
  path->add_option("--path", pth.path, "Path YAML")->required();
  auto* band_opt = path->add_option("--band-width", band_width, "Band width in meters");
  auto* ground_opt = path->add_option("--ground-frame", ground_frame, "Frame of the path polyline");
  path->add_option("--frames", pth.frames, "Frame tree YAML")->required();
  path->add_option("--camera-info", pth.camera_info, "Projector camera-info YAML")->required();
  path->add_option("--projector-frame", pth.projector_frame, "Projector optical frame")->required();
  path->add_option("--splat-radius", pth.splat_radius, "Accepted for parity with render")
      ->capture_default_str();
  path->add_option("--out", pth.out, "Output image (.ppm or .png)")->required();

  cli::VerifyArgs ver;
  std::string raycast_info;
  auto* verify = app.add_subcommand("verify", "Measure projection alignment error");
  verify->add_option("--scene", ver.scene, "Scene YAML")->required();
  verify->add_option("--frames", ver.frames, "Frame tree YAML")->required();
  verify->add_option("--camera-info", ver.camera_info, "Projector camera-info YAML")->required();
  auto* raycast_opt = verify->add_option("--raycast-camera-info", raycast_info,
                                         "Intrinsics used only for casting rays back");
  verify->add_option("--projector-frame", ver.projector_frame, "Projector optical frame")->required();
  verify->add_option("--report", ver.report, "JSON report to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kConfigError;
  }

  if (*calibrate) return cli::cmd_calibrate(cal, std::cerr);
  if (*render) return cli::cmd_render(ren, std::cerr);
  if (*path) {
    if (*band_opt) pth.band_width = band_width;
    if (*ground_opt) pth.ground_frame = ground_frame;
    return cli::cmd_path(pth, std::cerr);
  }
  if (*raycast_opt) ver.raycast_camera_info = raycast_info;
  return cli::cmd_verify(ver, std::cerr);
}
