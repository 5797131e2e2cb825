import httpx
import pytest

from intentgate.config import fixture_path
from intentgate.planner import (
    HTTPPlannerClient,
    NoPlanFound,
    PlanStep,
    TemplatePlanner,
    parse_plan_response,
)

ALL_TOOLS = ["create_document", "initiate_share", "revoke_document_access", "read_document"]


@pytest.fixture(scope="module")
def planner():
    return TemplatePlanner.from_file(fixture_path("planner.json"))


class TestTemplatePlanner:
    def test_create_document_plan(self, planner):
        steps = planner.plan("Create a document titled Q3 Outlook", ALL_TOOLS)
        assert steps == [
            PlanStep(
                tool_name="create_document",
                args={"title": "Q3 Outlook"},
                rationale="intent asks for a new document titled Q3 Outlook",
            )
        ]

    def test_share_plan_extracts_both_slots(self, planner):
        steps = planner.plan("Share document D-8822 with user U-2", ALL_TOOLS)
        assert steps[0].tool_name == "initiate_share"
        assert steps[0].args == {"document_id": "D-8822", "target_user_id": "U-2"}

    def test_revoke_plan_extracts_level(self, planner):
        steps = planner.plan(
            "Revoke all access for user U-2 on document D-8821", ALL_TOOLS
        )
        assert steps[0].args == {
            "document_id": "D-8821",
            "target_user_id": "U-2",
            "permission_level": "all",
        }

    def test_unmatched_intent_raises(self, planner):
        with pytest.raises(NoPlanFound):
            planner.plan("Fold the laundry", ALL_TOOLS)

    def test_deterministic(self, planner):
        intent = "Read document D-9101"
        assert planner.plan(intent, ALL_TOOLS) == planner.plan(intent, ALL_TOOLS)


class TestHTTPPlannerClient:
    def _client(self, handler):
        transport = httpx.MockTransport(handler)
        return HTTPPlannerClient(
            "http://planner.test", client=httpx.Client(transport=transport, base_url="http://planner.test")
        )

    def test_parses_remote_steps(self):
        def handler(request):
            return httpx.Response(
                200,
                json={
                    "steps": [
                        {"tool": "read_document", "args": {"document_id": "D-1"}, "rationale": "r"}
                    ]
                },
            )

        steps = self._client(handler).plan("read D-1", ["read_document"])
        assert steps == [PlanStep("read_document", {"document_id": "D-1"}, "r")]

    def test_404_is_no_plan(self):
        def handler(request):
            return httpx.Response(404)

        with pytest.raises(NoPlanFound):
            self._client(handler).plan("x", [])

    def test_empty_steps_is_no_plan(self):
        with pytest.raises(NoPlanFound):
            parse_plan_response({"steps": []})
