"""Running a monitored trial through the session service.

Sessions are event-sourced: every mutation appends one JSON line to the
session's log, and replaying the log reproduces the state exactly.  The
same store backs the HTTP API (`curtailseq serve`); here it is driven
in process, including the optimistic-concurrency and undo paths.
"""

import tempfile

from curtailseq import Hypotheses
from curtailseq.service import ConflictError, SessionStore, boundaries_payload

store = SessionStore(tempfile.mkdtemp())

# Creating a session runs the design search and freezes the design into
# the created event, so replays never depend on later code changes.
session = store.create_session(Hypotheses(0.1, 0.35))
print(f"session {session.id[:8]}: u={session.design.u}, K={session.design.K}, "
      f"status={session.status}")

# The chart payload the dashboard renders: efficacy line and futility staircase.
payload = boundaries_payload(session.design)
print("futility staircase:", [b for b in payload["futility"] if b is not None])

# Record outcomes.  The decision message always says how many more
# responders the trial needs.
for responder in [False, True, False, False]:
    decision, session = store.record_outcome(session.id, responder)
    print(f"patient {decision['m']}: responders={decision['s']} "
          f"-> {decision['decision']} (need {decision['responders_needed']} more)")

# Optimistic concurrency: a writer holding a stale sequence number gets
# a conflict and must refetch.
try:
    store.record_outcome(session.id, True, expected_seq=2)
except ConflictError as exc:
    print("stale write rejected:", exc)

# Data-entry corrections are events too, and can reopen a stop.
session = store.undo_outcome(session.id)
print(f"after undo: enrolled={session.enrolled}, responders={session.responders}")

# Drive the trial to its futility stop and finalize.
while store.get(session.id).status == "enrolling":
    decision, session = store.record_outcome(session.id, False)
print(f"stopped at (m={decision['m']}, s={decision['s']}): {session.status}")

report = store.finalize(session.id)
print("adjusted estimate:", report["estimates"]["bias_adjusted"])
print("median unbiased estimate:", report["estimates"]["mue"])
print("95% interval (dufsat):", (report["intervals"]["dufsat"]["lower"],
                                 report["intervals"]["dufsat"]["upper"]))

# The event log is the source of truth: replay reproduces the session.
replayed = store.replay(session.id)
print("replay reproduces state:", replayed.to_dict() == store.get(session.id).to_dict())
print("events:", [e.kind for e in store.events(session.id)][:6], "...")
