from __future__ import annotations

import random

import pytest

from searchsim.agents import UserKind
from searchsim.corpus import Document, QrelSet, Topic, parse_qrels
from searchsim.index import build_index
from searchsim.llm import BackendError, ScriptedBackend
from searchsim.session import (
    ANOMALY,
    CONSECUTIVE_IRRELEVANT,
    DOCUMENT_VIEWED,
    END_BACKEND_FAILURE,
    END_MAX_QUERIES,
    END_QUERIES_EXHAUSTED,
    JUDGMENT_MADE,
    QUERY_ISSUED,
    SESSION_ENDED,
    SNIPPET_VIEWED,
    CampaignError,
    CostModel,
    SessionPolicy,
    SnippetStopRule,
    derive_session_seed,
    read_session_log,
    run_campaign,
    run_session,
    session_log_from_jsonl,
    session_log_to_jsonl,
    validate_campaign_kinds,
    write_campaign_manifest,
    write_session_log,
)

# Reply-table keys anchored on fixed phrases of the default templates.
ANSWER_YES = {"Would this text be useful": "Yes",
              "Output only the summary": "themes so far"}
ANSWER_NO = {"Would this text be useful": "No",
             "Output only the summary": "themes so far"}


def backend_with(queries, judge_table):
    replies = dict(judge_table)
    replies["Output only the numbered queries"] = "\n".join(
        f"{i}. {q}" for i, q in enumerate(queries, 1))
    replies["Output only the query"] = "reformulated follow up"
    return ScriptedBackend(replies)


@pytest.fixture
def twin_setup():
    docs = [Document(doc_id="d1", body="twin text about things"),
            Document(doc_id="d2", body="twin text about stuff")]
    index = build_index(docs)
    topic = Topic(topic_id="9", title="twin things")
    qrels = parse_qrels(b"9 0 d1 2\n9 0 d2 1\n")
    return docs, index, topic, qrels


def kinds_of(log):
    return [it.kind for it in log.interactions]


class TestRunSessionTraces:
    def test_no_hits_logs_query_and_end_only(self):
        index = build_index([Document(doc_id="d", body="completely unrelated words")])
        topic = Topic(topic_id="1", title="zzz qqq xxx")
        log = run_session(topic, UserKind.RND, index, QrelSet(),
                          policy=SessionPolicy(max_queries=1, page_size=2))
        assert kinds_of(log) == [QUERY_ISSUED, SESSION_ENDED]
        assert log.end_reason == END_MAX_QUERIES

    def test_all_relevant_two_results_trace(self, twin_setup):
        _, index, topic, qrels = twin_setup
        backend = backend_with(["twin"], ANSWER_YES)
        policy = SessionPolicy(max_queries=1, page_size=2,
                               stop_rule=SnippetStopRule("fixed_depth", 2))
        log = run_session(topic, UserKind.FTTC, index, qrels, policy=policy,
                          backend=backend, queries_per_session=1)
        assert kinds_of(log) == [
            QUERY_ISSUED,
            SNIPPET_VIEWED, DOCUMENT_VIEWED, JUDGMENT_MADE,
            SNIPPET_VIEWED, DOCUMENT_VIEWED, JUDGMENT_MADE,
            SESSION_ENDED,
        ]
        judgments = [it for it in log.interactions if it.kind == JUDGMENT_MADE]
        assert all(j.payload["relevant"] for j in judgments)
        assert [j.payload["grade"] for j in judgments] == [2, 1]

    def test_rerun_is_byte_identical(self, twin_setup):
        _, index, topic, qrels = twin_setup
        policy = SessionPolicy(max_queries=2, page_size=2,
                               stop_rule=SnippetStopRule("fixed_depth", 2))

        def once():
            return run_session(topic, UserKind.CRF, index, qrels, policy=policy,
                               backend=ScriptedBackend(), rng_seed=7,
                               queries_per_session=2)
        assert session_log_to_jsonl(once()) == session_log_to_jsonl(once())

    def test_judged_docs_skipped_without_cost_in_later_serps(self, twin_setup):
        _, index, topic, qrels = twin_setup
        backend = backend_with(["twin", "twin text"], ANSWER_YES)
        policy = SessionPolicy(max_queries=2, page_size=2,
                               stop_rule=SnippetStopRule("fixed_depth", 2))
        log = run_session(topic, UserKind.FTTC, index, qrels, policy=policy,
                          backend=backend, queries_per_session=2)
        snippet_views = [it for it in log.interactions if it.kind == SNIPPET_VIEWED]
        assert len(snippet_views) == 2  # nothing re-viewed under the second query
        assert len([it for it in log.interactions if it.kind == QUERY_ISSUED]) == 2

    def test_consecutive_irrelevant_stop_rule(self):
        docs = [Document(doc_id=f"d{i}", body="shared term filler") for i in range(6)]
        index = build_index(docs)
        topic = Topic(topic_id="2", title="shared term")
        policy = SessionPolicy(max_queries=1, page_size=6,
                               stop_rule=SnippetStopRule(CONSECUTIVE_IRRELEVANT, 2))
        backend = backend_with(["shared"], ANSWER_NO)
        log = run_session(topic, UserKind.FTTC, index, QrelSet(), policy=policy,
                          backend=backend, queries_per_session=1)
        assert len([it for it in log.interactions if it.kind == SNIPPET_VIEWED]) == 2

    def test_unjudged_document_gets_none_grade(self):
        docs = [Document(doc_id="known", body="apple orchard report"),
                Document(doc_id="mystery", body="apple cider festival news")]
        index = build_index(docs)
        topic = Topic(topic_id="3", title="apple")
        qrels = parse_qrels(b"3 0 known 1\n")
        backend = backend_with(["apple"], ANSWER_YES)
        log = run_session(topic, UserKind.FTTC, index, qrels,
                          policy=SessionPolicy(max_queries=1, page_size=2,
                                               stop_rule=SnippetStopRule("fixed_depth", 2)),
                          backend=backend, queries_per_session=1)
        grades = {it.payload["doc_id"]: it.payload["grade"]
                  for it in log.interactions if it.kind == JUDGMENT_MADE}
        assert grades["known"] == 1
        assert grades["mystery"] is None

    def test_backend_failure_marks_partial_log(self, twin_setup):
        _, index, topic, qrels = twin_setup

        class FailsOnJudge:
            def __init__(self):
                self.inner = backend_with(["twin"], ANSWER_YES)

            def complete(self, request):
                if request.tag == "relevance_judgment":
                    raise BackendError("mid-session outage")
                return self.inner.complete(request)

        log = run_session(topic, UserKind.FTTC, index, qrels,
                          policy=SessionPolicy(max_queries=1, page_size=2),
                          backend=FailsOnJudge(), queries_per_session=1)
        assert log.end_reason == END_BACKEND_FAILURE
        assert any(it.kind == ANOMALY for it in log.interactions)
        assert kinds_of(log)[-1] == SESSION_ENDED

    def test_queries_exhausted(self, twin_setup):
        _, index, topic, qrels = twin_setup
        backend = backend_with(["nothing matches this"], ANSWER_YES)
        log = run_session(topic, UserKind.FTTC, index, qrels,
                          policy=SessionPolicy(max_queries=5, page_size=2),
                          backend=backend, queries_per_session=1)
        assert log.end_reason == END_QUERIES_EXHAUSTED
        assert len(log.queries_issued) == 1

    def test_feedback_user_switches_to_followups_after_first_judgment(self, twin_setup):
        _, index, topic, qrels = twin_setup
        backend = backend_with(["twin", "unused second"], ANSWER_YES)
        policy = SessionPolicy(max_queries=3, page_size=2,
                               stop_rule=SnippetStopRule("fixed_depth", 2))
        log = run_session(topic, UserKind.PRF, index, qrels, policy=policy,
                          backend=backend, queries_per_session=2)
        assert log.queries_issued[0] == "twin"
        assert log.queries_issued[1:] == ["reformulated follow up"] * 2
        assert log.initial_queries == ["twin", "unused second"]

    def test_rnd_star_requires_preset(self, twin_setup):
        _, index, topic, qrels = twin_setup
        with pytest.raises(ValueError):
            run_session(topic, UserKind.RND_STAR, index, qrels)

    def test_llm_kind_requires_backend(self, twin_setup):
        _, index, topic, qrels = twin_setup
        with pytest.raises(ValueError):
            run_session(topic, UserKind.FTTC, index, qrels)


class TestSessionProperties:
    def fuzz_session(self, rng):
        words = ["ant", "bee", "cat", "dog", "elk", "fox", "gnu", "hen"]
        docs = [Document(doc_id=f"d{i}",
                         body=" ".join(rng.choice(words) for _ in range(rng.randrange(3, 15))))
                for i in range(rng.randrange(2, 12))]
        index = build_index(docs)
        topic = Topic(topic_id=str(rng.randrange(100)),
                      title=" ".join(rng.sample(words, 3)),
                      description=" ".join(rng.sample(words, 4)))
        qrels = QrelSet({(topic.topic_id, d.doc_id): rng.randrange(0, 3)
                         for d in docs if rng.random() < 0.6})
        max_pages = rng.randrange(1, 3)
        page_size = rng.randrange(1, 6)
        if rng.random() < 0.5:
            rule = SnippetStopRule("fixed_depth",
                                   rng.randrange(1, page_size * max_pages + 1))
        else:
            rule = SnippetStopRule(CONSECUTIVE_IRRELEVANT, rng.randrange(1, 5))
        policy = SessionPolicy(max_queries=rng.randrange(1, 5), page_size=page_size,
                               max_pages_per_query=max_pages, stop_rule=rule)
        kind = rng.choice([UserKind.RND, UserKind.TTT, UserKind.FTTC,
                           UserKind.PRF, UserKind.NRF, UserKind.CRF, UserKind.CRF_PRIME])
        cost = CostModel(query_cost=rng.choice([0.0, 1.0, 10.0]),
                         snippet_cost=rng.choice([0.5, 3.0]),
                         document_cost=rng.choice([2.0, 20.0]),
                         judgment_cost=rng.choice([0.0, 5.0]))
        log = run_session(topic, kind, index, qrels, policy=policy, cost_model=cost,
                          backend=ScriptedBackend(), rng_seed=rng.randrange(10_000),
                          queries_per_session=rng.randrange(1, 5))
        return log, cost

    def test_causality_cost_and_uniqueness_fuzzed(self):
        rng = random.Random(20240803)
        for _ in range(60):
            log, cost = self.fuzz_session(rng)
            seqs = [it.seq for it in log.interactions]
            assert seqs == sorted(set(seqs))
            assert kinds_of(log).count(SESSION_ENDED) == 1
            assert kinds_of(log)[-1] == SESSION_ENDED

            viewed_docs, opened_docs, judged_docs = set(), set(), []
            for it in log.interactions:
                if it.kind == SNIPPET_VIEWED:
                    viewed_docs.add(it.payload["doc_id"])
                elif it.kind == DOCUMENT_VIEWED:
                    assert it.payload["doc_id"] in viewed_docs
                    opened_docs.add(it.payload["doc_id"])
                elif it.kind == JUDGMENT_MADE:
                    assert it.payload["doc_id"] in opened_docs
                    judged_docs.append(it.payload["doc_id"])
            assert len(judged_docs) == len(set(judged_docs))

            counts = {k: kinds_of(log).count(k) for k in
                      (QUERY_ISSUED, SNIPPET_VIEWED, DOCUMENT_VIEWED, JUDGMENT_MADE)}
            expected = (cost.query_cost * counts[QUERY_ISSUED]
                        + cost.snippet_cost * counts[SNIPPET_VIEWED]
                        + cost.document_cost * counts[DOCUMENT_VIEWED]
                        + cost.judgment_cost * counts[JUDGMENT_MADE])
            assert log.total_cost() == pytest.approx(expected, abs=0.0)
            assert log.queries_issued == [it.payload["query"] for it in log.interactions
                                          if it.kind == QUERY_ISSUED]

    def test_serialization_round_trip_fuzzed(self):
        rng = random.Random(20240804)
        for _ in range(10):
            log, _ = self.fuzz_session(rng)
            log.config_hash = "cafe" * 16
            restored = session_log_from_jsonl(session_log_to_jsonl(log))
            assert restored.topic_id == log.topic_id
            assert restored.user_kind == log.user_kind
            assert restored.seed == log.seed
            assert restored.config_hash == log.config_hash
            assert restored.initial_queries == log.initial_queries
            assert restored.queries_issued == log.queries_issued
            assert restored.interactions == log.interactions
            assert session_log_to_jsonl(restored) == session_log_to_jsonl(log)


class TestPolicyValidation:
    def test_fixed_depth_cannot_exceed_reachable_results(self):
        with pytest.raises(ValueError):
            SessionPolicy(page_size=5, max_pages_per_query=1,
                          stop_rule=SnippetStopRule("fixed_depth", 6))

    def test_cost_model_rejects_negative(self):
        with pytest.raises(ValueError):
            CostModel(query_cost=-1.0)

    def test_unknown_stop_rule(self):
        with pytest.raises(ValueError):
            SnippetStopRule("coin_flip", 1)


class TestCampaign:
    @pytest.fixture
    def campaign_setup(self, fixture_collection):
        docs, topics, qrels = fixture_collection
        index = build_index(docs)
        policy = SessionPolicy(max_queries=2, page_size=3,
                               stop_rule=SnippetStopRule("fixed_depth", 3))
        return topics[:2], index, qrels, policy

    def test_kind_validation(self):
        with pytest.raises(CampaignError):
            validate_campaign_kinds([])
        with pytest.raises(CampaignError):
            validate_campaign_kinds([UserKind.RND_STAR, UserKind.RND])
        ordered = validate_campaign_kinds([UserKind.RND_STAR, UserKind.FTTC])
        assert ordered.index(UserKind.FTTC) < ordered.index(UserKind.RND_STAR)

    def test_documented_order_and_count(self, campaign_setup):
        topics, index, qrels, policy = campaign_setup
        logs = run_campaign(topics, [UserKind.RND, UserKind.TTT], index, qrels,
                            policy=policy, backend=ScriptedBackend(),
                            queries_per_session=2)
        assert [(log.topic_id, log.user_kind) for log in logs] == [
            (topics[0].topic_id, UserKind.RND), (topics[0].topic_id, UserKind.TTT),
            (topics[1].topic_id, UserKind.RND), (topics[1].topic_id, UserKind.TTT),
        ]

    def test_rerun_identical(self, campaign_setup):
        topics, index, qrels, policy = campaign_setup
        def once():
            logs = run_campaign(topics, [UserKind.RND, UserKind.FTTC], index, qrels,
                                policy=policy, backend=ScriptedBackend(),
                                campaign_seed=5, queries_per_session=2)
            return [session_log_to_jsonl(log) for log in logs]
        assert once() == once()

    def test_adding_a_kind_leaves_other_sessions_unchanged(self, campaign_setup):
        topics, index, qrels, policy = campaign_setup
        base = run_campaign(topics, [UserKind.RND, UserKind.TTT], index, qrels,
                            policy=policy, backend=ScriptedBackend(),
                            campaign_seed=5, queries_per_session=2)
        extended = run_campaign(topics, [UserKind.RND, UserKind.TTT, UserKind.CRF],
                                index, qrels, policy=policy, backend=ScriptedBackend(),
                                campaign_seed=5, queries_per_session=2)
        base_by_key = {(log.topic_id, log.user_kind): session_log_to_jsonl(log)
                       for log in base}
        for log in extended:
            key = (log.topic_id, log.user_kind)
            if key in base_by_key:
                assert session_log_to_jsonl(log) == base_by_key[key]

    def test_rnd_star_replays_fttc_queries(self, campaign_setup):
        topics, index, qrels, policy = campaign_setup
        logs = run_campaign(topics, [UserKind.FTTC, UserKind.RND_STAR], index, qrels,
                            policy=policy, backend=ScriptedBackend(),
                            queries_per_session=2)
        by_key = {(log.topic_id, log.user_kind): log for log in logs}
        for topic in topics:
            fttc = by_key[(topic.topic_id, UserKind.FTTC)]
            star = by_key[(topic.topic_id, UserKind.RND_STAR)]
            assert star.initial_queries == fttc.initial_queries
            assert star.queries_issued == fttc.queries_issued

    def test_workers_do_not_change_output(self, campaign_setup):
        topics, index, qrels, policy = campaign_setup
        kinds = [UserKind.RND, UserKind.FTTC, UserKind.RND_STAR]
        serial = run_campaign(topics, kinds, index, qrels, policy=policy,
                              backend=ScriptedBackend(), queries_per_session=2)
        parallel = run_campaign(topics, kinds, index, qrels, policy=policy,
                                backend=ScriptedBackend(), queries_per_session=2,
                                workers=4)
        assert ([session_log_to_jsonl(log) for log in serial]
                == [session_log_to_jsonl(log) for log in parallel])

    def test_campaign_requires_topics(self, campaign_setup):
        _, index, qrels, policy = campaign_setup
        with pytest.raises(CampaignError):
            run_campaign([], [UserKind.RND], index, qrels, policy=policy)

    def test_failed_fttc_degrades_rnd_star_without_crashing(self, campaign_setup):
        topics, index, qrels, policy = campaign_setup
        backend = ScriptedBackend({"Output only the numbered queries": "",
                                   "exactly": ""})  # both attempts unparseable
        logs = run_campaign(topics, [UserKind.FTTC, UserKind.RND_STAR], index, qrels,
                            policy=policy, backend=backend, queries_per_session=2)
        by_kind = {}
        for log in logs:
            by_kind.setdefault(log.user_kind, []).append(log)
        for log in by_kind[UserKind.FTTC]:
            assert log.end_reason == "query_generation_failure"
            assert log.initial_queries == []
        for log in by_kind[UserKind.RND_STAR]:
            assert log.end_reason == END_QUERIES_EXHAUSTED
            assert log.queries_issued == []

    def test_seed_derivation_is_stable_and_distinct(self):
        a = derive_session_seed(0, "801", UserKind.RND)
        assert a == derive_session_seed(0, "801", UserKind.RND)
        assert a != derive_session_seed(0, "801", UserKind.TTT)
        assert a != derive_session_seed(1, "801", UserKind.RND)
        assert a != derive_session_seed(0, "802", UserKind.RND)


class TestLogFiles:
    def test_write_read_and_manifest(self, tmp_path, twin_setup):
        _, index, topic, qrels = twin_setup
        log = run_session(topic, UserKind.RND, index, qrels,
                          policy=SessionPolicy(max_queries=1, page_size=2), rng_seed=3)
        log.config_hash = "ab" * 32
        path = write_session_log(log, tmp_path)
        assert path.name == "9__RND.jsonl"
        restored = read_session_log(path)
        assert restored.interactions == log.interactions
        manifest_path = write_campaign_manifest(tmp_path, [log], campaign_seed=0,
                                                config_hash=log.config_hash)
        assert manifest_path.is_file()
