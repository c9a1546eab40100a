#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "geo3d/codec.hpp"
#include "geo3d/error.hpp"
#include "geo3d/raster.hpp"
#include "geo3d/scene.hpp"
#include "support.hpp"

using namespace geo3d;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path("scratch") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("depth raster round-trips bit-exactly") {
  const fs::path dir = fresh_dir("raster_depth");
  DepthRaster r;
  r.width = 3;
  r.height = 2;
  r.values = {0.0f, 0.1f, 1.5f, 3.14159f, 1e-30f, 65504.0f};
  const std::string path = (dir / "d.raw").string();
  save_depth_raster(path, r);
  const DepthRaster back = load_depth_raster(path);
  CHECK(back.width == 3);
  CHECK(back.height == 2);
  REQUIRE(back.values.size() == r.values.size());
  CHECK(std::memcmp(back.values.data(), r.values.data(),
                    r.values.size() * sizeof(float)) == 0);
}

TEST_CASE("mask raster round-trips bit-exactly") {
  const fs::path dir = fresh_dir("raster_mask");
  MaskRaster r;
  r.width = 4;
  r.height = 1;
  r.values = {0, 1, 255, 7};
  const std::string path = (dir / "m.raw").string();
  save_mask_raster(path, r);
  const MaskRaster back = load_mask_raster(path);
  CHECK(back.width == 4);
  CHECK(back.height == 1);
  CHECK(back.values == r.values);
}

TEST_CASE("raster loader rejects malformed files with distinct kinds") {
  const fs::path dir = fresh_dir("raster_errors");

  const auto write_bytes = [&](const std::string& name,
                               const std::vector<char>& bytes) {
    std::ofstream out(dir / name, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    return (dir / name).string();
  };

  SUBCASE("missing file") {
    try {
      load_depth_raster((dir / "absent.raw").string());
      FAIL("expected io error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::io);
      CHECK(std::string(e.what()).find("absent.raw") != std::string::npos);
    }
  }

  SUBCASE("bad magic") {
    std::vector<char> bytes(16 + 4, 0);
    std::memcpy(bytes.data(), "XXXX", 4);
    const std::string path = write_bytes("magic.raw", bytes);
    try {
      load_depth_raster(path);
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse);
    }
  }

  SUBCASE("wrong element kind") {
    DepthRaster r;
    r.width = 1;
    r.height = 1;
    r.values = {1.0f};
    const std::string path = (dir / "kind.raw").string();
    save_depth_raster(path, r);
    try {
      load_mask_raster(path);
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse);
    }
  }

  SUBCASE("payload shorter than header promises") {
    std::vector<char> bytes(16 + 4, 0);  // 2x2 f32 needs 16 payload bytes
    std::memcpy(bytes.data(), "GAR1", 4);
    const std::uint32_t w = 2, h = 2, kind = 0;
    std::memcpy(bytes.data() + 4, &w, 4);
    std::memcpy(bytes.data() + 8, &h, 4);
    std::memcpy(bytes.data() + 12, &kind, 4);
    const std::string path = write_bytes("short.raw", bytes);
    try {
      load_depth_raster(path);
      FAIL("expected dimension mismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::dimension_mismatch);
    }
  }
}

TEST_CASE("nearest resampling picks the documented source pixel") {
  DepthRaster src;
  src.width = 4;
  src.height = 2;
  src.values = {0, 1, 2, 3, 4, 5, 6, 7};

  SUBCASE("identity at equal size") {
    const DepthRaster out = resample_nearest(src, 4, 2);
    CHECK(out.values == src.values);
  }

  SUBCASE("downscale by two") {
    const DepthRaster out = resample_nearest(src, 2, 1);
    // src index = min(size-1, floor((i+0.5)*src/dst)): u -> {1, 3}, v -> {1}
    REQUIRE(out.values.size() == 2);
    CHECK(out.values[0] == 5.0f);
    CHECK(out.values[1] == 7.0f);
  }

  SUBCASE("upscale by two duplicates neighbours") {
    const DepthRaster out = resample_nearest(src, 8, 4);
    REQUIRE(out.width == 8);
    REQUIRE(out.height == 4);
    for (int v = 0; v < 4; ++v)
      for (int u = 0; u < 8; ++u) CHECK(out.at(u, v) == src.at(u / 2, v / 2));
  }
}

TEST_CASE("scene bundle save/load round-trips field-for-field") {
  const fs::path dir = fresh_dir("bundle_roundtrip");
  const SceneRecord scene = testsupport::quadrant_scene("sc0001", 640, 480);
  save_scene(scene, dir.string());
  const SceneRecord back = load_scene(dir.string());

  CHECK(back.scene_id == scene.scene_id);
  CHECK(back.meta.width == scene.meta.width);
  CHECK(back.meta.height == scene.meta.height);
  CHECK(back.intrinsics.fx == scene.intrinsics.fx);
  CHECK(back.intrinsics.fy == scene.intrinsics.fy);
  CHECK(back.intrinsics.cx == scene.intrinsics.cx);
  CHECK(back.intrinsics.cy == scene.intrinsics.cy);
  REQUIRE(back.depth.values.size() == scene.depth.values.size());
  CHECK(std::memcmp(back.depth.values.data(), scene.depth.values.data(),
                    scene.depth.values.size() * sizeof(float)) == 0);
  REQUIRE(back.instances.size() == scene.instances.size());
  for (std::size_t i = 0; i < scene.instances.size(); ++i) {
    const InstanceGT& a = scene.instances[i];
    const InstanceGT& b = back.instances[i];
    CHECK(b.instance_id == a.instance_id);
    CHECK(b.category == a.category);
    CHECK(b.box3d.as_array() == a.box3d.as_array());
    CHECK(b.mask.values == a.mask.values);
  }
  REQUIRE(back.expressions.size() == scene.expressions.size());
  for (std::size_t i = 0; i < scene.expressions.size(); ++i) {
    CHECK(back.expressions[i].instance_id == scene.expressions[i].instance_id);
    CHECK(back.expressions[i].text == scene.expressions[i].text);
  }
}

TEST_CASE("scene loader reports distinct error kinds") {
  SUBCASE("missing bundle") {
    try {
      load_scene("scratch/does_not_exist_bundle");
      FAIL("expected io error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::io);
    }
  }

  SUBCASE("malformed json") {
    const fs::path dir = fresh_dir("bundle_badjson");
    std::ofstream(dir / "scene.json") << "{not json";
    try {
      load_scene(dir.string());
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse);
    }
  }

  SUBCASE("depth raster with wrong pixel count") {
    const fs::path dir = fresh_dir("bundle_baddepth");
    SceneRecord scene = testsupport::quadrant_scene("sc0002", 64, 48);
    save_scene(scene, dir.string());
    DepthRaster wrong;
    wrong.width = 8;
    wrong.height = 8;
    wrong.values.assign(64, 1.0f);
    save_depth_raster((dir / scene.depth_path).string(), wrong);
    try {
      load_scene(dir.string());
      FAIL("expected dimension mismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::dimension_mismatch);
    }
  }

  SUBCASE("expression referencing absent instance") {
    const fs::path dir = fresh_dir("bundle_badref");
    SceneRecord scene = testsupport::quadrant_scene("sc0003", 64, 48);
    save_scene(scene, dir.string());
    ojson j;
    {
      std::ifstream in(dir / "scene.json");
      in >> j;
    }
    j["expressions"].push_back(ojson{{"instance_id", 99}, {"text", "ghost"}});
    std::ofstream(dir / "scene.json") << j.dump(2) << "\n";
    try {
      load_scene(dir.string());
      FAIL("expected referential error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::referential);
    }
  }

  SUBCASE("duplicate instance ids") {
    const fs::path dir = fresh_dir("bundle_dupid");
    SceneRecord scene = testsupport::quadrant_scene("sc0004", 64, 48);
    save_scene(scene, dir.string());
    ojson j;
    {
      std::ifstream in(dir / "scene.json");
      in >> j;
    }
    j["instances"][1]["instance_id"] = j["instances"][0]["instance_id"];
    std::ofstream(dir / "scene.json") << j.dump(2) << "\n";
    try {
      load_scene(dir.string());
      FAIL("expected validation error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::validation);
    }
  }
}

TEST_CASE("box projection matches the eight-corner bound") {
  const CameraIntrinsics k{500, 500, 320, 240};
  const ImageMeta meta{640, 480};

  SUBCASE("unit cube five meters out") {
    const Box3D cube({0, 0, 5}, 1, 1, 1, 0, 0, 0);
    const Box2D r = project_box_to_2d(cube, k, meta);
    // Near-face corners at z = 4.5 dominate: 0.5 * 500 / 4.5 = 55.6 px.
    CHECK(r.u_min == 264);
    CHECK(r.v_min == 184);
    CHECK(r.u_max == 376);
    CHECK(r.v_max == 296);
  }

  SUBCASE("box behind the camera is not visible") {
    const Box3D behind({0, 0, -5}, 1, 1, 1, 0, 0, 0);
    try {
      project_box_to_2d(behind, k, meta);
      FAIL("expected not_visible");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::not_visible);
    }
  }

  SUBCASE("every visible corner lies inside the returned box") {
    Rng rng(20240817);
    int checked = 0;
    for (int it = 0; it < 1000; ++it) {
      Box3D b = testsupport::random_box(rng);
      auto arr = b.as_array();
      arr[2] = rng.uniform(0.5, 9.0);  // keep the center in front
      b = Box3D::from_array(arr);
      Box2D r{0, 0, 0, 0};
      try {
        r = project_box_to_2d(b, k, meta);
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::not_visible);
        continue;
      }
      r.validate();
      CHECK(r.u_min >= 0);
      CHECK(r.v_min >= 0);
      CHECK(r.u_max <= meta.width);
      CHECK(r.v_max <= meta.height);
      for (const Point3D& c : b.corners()) {
        if (c.z <= 0.0) continue;
        const auto [u, v] = project_point(c, k);
        const double uc = std::min(double(meta.width), std::max(0.0, u));
        const double vc = std::min(double(meta.height), std::max(0.0, v));
        CHECK(uc >= r.u_min);
        CHECK(uc <= r.u_max);
        CHECK(vc >= r.v_min);
        CHECK(vc <= r.v_max);
      }
      ++checked;
    }
    CHECK(checked > 500);
  }
}

TEST_CASE("scene rescaling scales pixels and leaves 3D data alone") {
  const SceneRecord scene = testsupport::quadrant_scene("sc0005", 640, 480);

  SUBCASE("factor one is the identity") {
    const SceneRecord same = rescale_scene(scene, RescaleFactor{1.0});
    CHECK(same.meta.width == 640);
    CHECK(same.intrinsics.fx == scene.intrinsics.fx);
    CHECK(same.depth.values == scene.depth.values);
    CHECK(same.instances[0].mask.values == scene.instances[0].mask.values);
  }

  SUBCASE("factor half") {
    const SceneRecord half = rescale_scene(scene, RescaleFactor{0.5});
    CHECK(half.meta.width == 320);
    CHECK(half.meta.height == 240);
    CHECK(half.intrinsics.fx == scene.intrinsics.fx * 0.5);
    CHECK(half.intrinsics.cx == scene.intrinsics.cx * 0.5);
    CHECK(half.depth.width == 320);
    CHECK(half.instances[2].mask.width == 320);
    for (std::size_t i = 0; i < scene.instances.size(); ++i)
      CHECK(half.instances[i].box3d.as_array() ==
            scene.instances[i].box3d.as_array());
    // Constant-depth masks stay constant: any in-mask pixel keeps the value.
    const MaskRaster& m = half.instances[0].mask;
    const float z = static_cast<float>(scene.instances[0].box3d.center().z);
    int inside = 0;
    for (int v = 0; v < m.height; ++v)
      for (int u = 0; u < m.width; ++u)
        if (m.at(u, v)) {
          CHECK(half.depth.at(u, v) == z);
          ++inside;
        }
    CHECK(inside > 0);
  }
}

TEST_CASE("scene store indexes bundles by id") {
  const fs::path root = fresh_dir("store_root");
  const SceneRecord a = testsupport::quadrant_scene("sc_b", 64, 48);
  const SceneRecord b = testsupport::quadrant_scene("sc_a", 64, 48);
  save_scene(a, (root / "sc_b").string());
  save_scene(b, (root / "sc_a").string());

  SceneStore store(root.string());
  CHECK(store.size() == 2);
  const auto ids = store.ids();
  REQUIRE(ids.size() == 2);
  CHECK(ids[0] == "sc_a");
  CHECK(ids[1] == "sc_b");
  CHECK(store.get("sc_b").meta.width == 64);
  try {
    store.get("nope");
    FAIL("expected unknown_scene");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unknown_scene);
  }
}
