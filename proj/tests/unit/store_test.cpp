#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <thread>

#include "wnet/codec.hpp"
#include "wnet/error.hpp"
#include "wnet/service/annotation_store.hpp"

namespace wnet::service {
namespace {

ImageTile blank(const std::string& id, int h = 64, int w = 64) {
  return ImageTile(id, h, w, std::vector<double>(static_cast<std::size_t>(h) * w * 3, 0.5));
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::io;
}

class TempDir {
 public:
  TempDir() : path_(std::filesystem::temp_directory_path() / ("wnet_store_" + std::to_string(counter_++))) {
    std::filesystem::remove_all(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

TEST(Store, AddAndDeleteExamples) {
  AnnotationStore store;
  EXPECT_EQ(store.add_image(blank("a")).revision, 0u);
  const auto r1 = store.add_point("a", {10, 20});
  EXPECT_EQ(r1.revision, 1u);
  ASSERT_EQ(r1.points.size(), 1u);
  EXPECT_EQ(r1.points[0].provenance, Provenance::manual);
  const auto r2 = store.delete_point("a", r1.points[0].id);
  EXPECT_EQ(r2.revision, 2u);
  EXPECT_TRUE(r2.points.empty());
}

TEST(Store, Errors) {
  AnnotationStore store;
  store.add_image(blank("a"));
  EXPECT_EQ(kind_of([&] { store.add_image(blank("a")); }), ErrorKind::conflict);
  EXPECT_EQ(kind_of([&] { store.get("b"); }), ErrorKind::not_found);
  EXPECT_EQ(kind_of([&] { store.add_point("b", {1, 1}); }), ErrorKind::not_found);
  EXPECT_EQ(kind_of([&] { store.delete_point("a", 99); }), ErrorKind::not_found);
  EXPECT_EQ(kind_of([&] { store.add_point("a", {64, 1}); }), ErrorKind::out_of_bounds);
  store.add_point("a", {3, 4});
  EXPECT_EQ(kind_of([&] { store.add_point("a", {3, 4 + 1e-7}); }), ErrorKind::duplicate);
  EXPECT_EQ(store.get("a").revision, 1u);
}

TEST(Store, RedetectionKeepsManualPoints) {
  AnnotationStore store;
  store.add_image(blank("a"));
  store.add_point("a", {5, 5});
  auto r = store.replace_detected("a", {{20, 20}, {30, 30}, {5, 5}});
  EXPECT_EQ(r.points.size(), 3u);
  r = store.add_point("a", {40, 41});
  r = store.replace_detected("a", {{50, 50}});
  std::vector<Point> manual, detected;
  for (const auto& p : r.points) (p.provenance == Provenance::manual ? manual : detected).push_back({p.x, p.y});
  EXPECT_EQ(manual, (std::vector<Point>{{5, 5}, {40, 41}}));
  EXPECT_EQ(detected, (std::vector<Point>{{50, 50}}));
  const auto before = store.get("a");
  const auto again = store.replace_detected("a", {{50, 50}});
  std::vector<Point> a, b;
  for (const auto& p : before.points) a.push_back({p.x, p.y});
  for (const auto& p : again.points) b.push_back({p.x, p.y});
  std::sort(a.begin(), a.end(), [](auto& l, auto& r) { return std::tie(l.x, l.y) < std::tie(r.x, r.y); });
  std::sort(b.begin(), b.end(), [](auto& l, auto& r) { return std::tie(l.x, l.y) < std::tie(r.x, r.y); });
  EXPECT_EQ(a, b);
  EXPECT_GT(again.revision, before.revision);
}

TEST(Store, GuidingSignalExamples) {
  AnnotationStore store;
  store.add_image(blank("a"));
  store.add_point("a", {1, 2});
  const auto rec = store.add_point("a", {3, 4});
  const auto sig = store.guiding_signal("a");
  EXPECT_EQ(sig.revision, rec.revision);
  EXPECT_EQ(sig.points, (std::vector<Point>{{1, 2}, {3, 4}}));
  for (const auto& p : rec.points) store.delete_point("a", p.id);
  const auto empty = read_guiding_signal(write_guiding_signal(store.guiding_signal("a")));
  EXPECT_TRUE(empty.points.empty());
  EXPECT_EQ(empty.revision, 4u);
  EXPECT_EQ(kind_of([&] { store.guiding_signal("zz"); }), ErrorKind::not_found);
}

TEST(Store, GuidingSignalRoundTripsThroughReadPoints) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 63.999);
  std::uniform_int_distribution<int> n(0, 30);
  const TempDir dir;
  for (int trial = 0; trial < 100; ++trial) {
    AnnotationStore store;
    const std::string id = "img" + std::to_string(trial);
    store.add_image(blank(id));
    const int k = n(rng);
    for (int i = 0; i < k; ++i) store.add_point(id, {u(rng), u(rng)});
    if (trial % 3 == 0) {
      std::vector<Point> det(static_cast<std::size_t>(n(rng)));
      for (auto& p : det) p = {u(rng), u(rng)};
      store.replace_detected(id, det);
    }
    const auto path = dir.path() / (id + ".json");
    store.export_guiding_signal(id, path);
    const auto back = read_points(read_text_file(path));
    EXPECT_EQ(back.image_id(), id);
    EXPECT_EQ(back, store.get(id).point_set());
    EXPECT_EQ(back.points(), store.guiding_signal(id).points);
  }
}

TEST(Store, RevisionsAreTotallyOrderedUnderConcurrency) {
  AnnotationStore store;
  store.add_image(blank("a", 512, 512));
  constexpr int kThreads = 16, kPerThread = 50;
  std::vector<std::vector<std::uint64_t>> seen(kThreads);
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < kThreads; ++t) {
      pool.emplace_back([&, t] {
        for (int i = 0; i < kPerThread; ++i) {
          const auto r = store.add_point("a", {static_cast<double>(t * 20 + 1), static_cast<double>(i * 5 + 1)});
          seen[t].push_back(r.revision);
          if (i % 5 == 4) {
            const auto pid = std::find_if(r.points.begin(), r.points.end(), [&](const StoredPoint& p) {
              return p.x == t * 20 + 1 && p.y == i * 5 + 1;
            });
            seen[t].push_back(store.delete_point("a", pid->id).revision);
          }
        }
      });
    }
  }
  std::vector<std::uint64_t> all;
  for (const auto& s : seen) {
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    all.insert(all.end(), s.begin(), s.end());
  }
  std::sort(all.begin(), all.end());
  const std::size_t mutations = kThreads * (kPerThread + kPerThread / 5);
  ASSERT_EQ(all.size(), mutations);
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i + 1);
  const auto final = store.get("a");
  EXPECT_EQ(final.revision, mutations);
  EXPECT_EQ(final.points.size(), static_cast<std::size_t>(kThreads * (kPerThread - kPerThread / 5)));
}

TEST(Store, ConcurrentImagesAreIndependent) {
  AnnotationStore store;
  for (int i = 0; i < 8; ++i) store.add_image(blank("i" + std::to_string(i)));
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < 16; ++t) {
      pool.emplace_back([&, t] {
        const std::string id = "i" + std::to_string(t % 8);
        for (int k = 0; k < 20; ++k) store.add_point(id, {static_cast<double>(t), static_cast<double>(k)});
      });
    }
  }
  for (int i = 0; i < 8; ++i) EXPECT_EQ(store.get("i" + std::to_string(i)).revision, 40u);
}

TEST(Store, PersistsAndRecovers) {
  const TempDir dir;
  ImageRecord a, b;
  {
    AnnotationStore store(dir.path());
    store.add_image(blank("a", 32, 48));
    store.add_image(blank("b"));
    store.add_point("a", {1.25, 2.5});
    const auto r = store.add_point("a", {7, 8});
    store.replace_detected("a", {{20, 20}});
    store.delete_point("a", r.points.back().id);
    store.add_point("b", {3, 3});
    a = store.get("a");
    b = store.get("b");
  }
  AnnotationStore reopened(dir.path());
  EXPECT_EQ(reopened.get("a"), a);
  EXPECT_EQ(reopened.get("b"), b);
  EXPECT_EQ(reopened.tile("a").width(), 48);
  const auto next = reopened.add_point("a", {9, 9});
  EXPECT_EQ(next.revision, a.revision + 1);
  EXPECT_GE(next.points.back().id, a.next_point_id);
}

TEST(Store, ProvenanceNames) {
  EXPECT_EQ(to_string(Provenance::manual), "manual");
  EXPECT_EQ(provenance_from_string("detected"), Provenance::detected);
  EXPECT_EQ(kind_of([] { provenance_from_string("other"); }), ErrorKind::format);
}

}  // namespace
}  // namespace wnet::service
