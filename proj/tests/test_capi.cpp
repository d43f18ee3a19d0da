// Exercises the shared library through its C interface only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <cstring>
#include <string>

#include "doctest.h"
#include "klab/klab.h"

TEST_SUITE("capi") {
  TEST_CASE("config, run and render") {
    klab_config* cfg = nullptr;
    REQUIRE(klab_config_parse(R"({"command":"identities","m_range":[1,3]})", &cfg) == KLAB_OK);
    klab_report* rep = nullptr;
    REQUIRE(klab_run(cfg, &rep) == KLAB_OK);
    CHECK(klab_report_overall(rep) == 1);
    CHECK(klab_report_size(rep) > 0);
    klab_entry e;
    REQUIRE(klab_report_entry(rep, 0, &e) == KLAB_OK);
    CHECK(std::strncmp(e.tag, "identities/m=1/", 15) == 0);
    CHECK(e.pass == 1);
    CHECK(klab_report_entry(rep, klab_report_size(rep), &e) == KLAB_E_INDEX_OUT_OF_RANGE);

    char* json = nullptr;
    REQUIRE(klab_report_render(rep, cfg, "json", &json) == KLAB_OK);
    klab_report* back = nullptr;
    REQUIRE(klab_report_parse(json, &back) == KLAB_OK);
    CHECK(klab_report_size(back) == klab_report_size(rep));
    klab_string_free(json);
    klab_report_free(back);
    klab_report_free(rep);
    klab_config_free(cfg);
  }

  TEST_CASE("errors are status codes") {
    klab_config* cfg = nullptr;
    CHECK(klab_config_parse(R"({"m_range":[0,1]})", &cfg) == KLAB_E_CONFIG_PARSE);
    CHECK(cfg == nullptr);
    CHECK(std::strstr(klab_last_error(), "m_range") != nullptr);
    CHECK(std::string(klab_status_name(KLAB_E_CONFIG_PARSE)) == "ConfigParse");
    CHECK(klab_config_parse(nullptr, &cfg) == KLAB_E_NULL_ARGUMENT);
    CHECK(klab_run(nullptr, nullptr) == KLAB_E_NULL_ARGUMENT);
    CHECK(klab_write_file("/nonexistent-dir/x.json", "{}") == KLAB_E_IO);
  }

  TEST_CASE("table through the C interface") {
    klab_config* cfg = nullptr;
    REQUIRE(klab_config_parse(R"({"command":"table","case":{"tag":"i","K":1,"alpha":0,"eta":-6,"eps":0},
                                  "m_range":[2,2],"grid":{"lo":"1/10","hi":"9/10","n":9}})",
                              &cfg) == KLAB_OK);
    CHECK(klab_config_is_table(cfg) == 1);
    char* csv = nullptr;
    size_t flagged = 99;
    REQUIRE(klab_table_dump(cfg, &csv, &flagged) == KLAB_OK);
    CHECK(flagged == 0);
    CHECK(std::strncmp(csv, "tau,Q,Y,s,phi,psi,lambda,mu,flag\n0.10000000000000001,0.98999999999999999,", 70) == 0);
    klab_string_free(csv);
    klab_config_free(cfg);
  }
}
