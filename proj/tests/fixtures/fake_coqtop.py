#!/usr/bin/env python3
# Stand-in for `coqtop -emacs`: speaks the same prompt protocol for a tiny
# fragment (True, conjunctions, Check/Print, BackTo) so the subprocess
# driver can be tested without Coq installed.
import sys
import time

SEP = "______________________________________"


class Session:
    def __init__(self):
        self.n = 1
        self.proof = None  # (name, [goals])
        self.history = {1: None}
        self.defined = set()

    def prompt(self):
        name = self.proof[0] if self.proof else ""
        depth = 1 if self.proof else 0
        return "<prompt>Coq < %d |%s| %d < </prompt>" % (self.n, name, depth)

    def commit(self):
        self.n += 1
        self.history[self.n] = None if self.proof is None else (self.proof[0], list(self.proof[1]))

    def goals(self):
        gs = self.proof[1]
        if not gs:
            return "No more goals."
        out = ["%d subgoal%s" % (len(gs), "" if len(gs) == 1 else "s"), ""]
        for i, g in enumerate(gs):
            out.append("%s(%d/%d)" % (SEP, i + 1, len(gs)))
            out.append(g)
        return "\n".join(out)

    def error(self, cmd, msg):
        cmd = cmd.strip()
        return "Toplevel input, characters 0-%d:\n> %s\n> ^\nError: %s" % (len(cmd), cmd, msg)

    def run(self, cmd):
        body = cmd.strip()
        if body.endswith("."):
            body = body[:-1].strip()
        word = body.split(" ", 1)[0] if body else ""
        rest = body[len(word):].strip()
        if word == "BackTo":
            k = int(rest)
            if k not in self.history:
                return self.error(cmd, "Invalid backtrack.")
            snap = self.history[k]
            self.proof = None if snap is None else (snap[0], list(snap[1]))
            self.n = k
            self.history = {s: v for s, v in self.history.items() if s <= k}
            return ""
        if word in ("Lemma", "Theorem"):
            name, goal = rest.split(":", 1)
            self.proof = (name.strip(), [goal.strip()])
            self.commit()
            return self.goals()
        if word == "Check":
            if rest == "nat":
                return "nat\n     : Set"
            if rest == "I":
                return "I\n     : True"
            return self.error(cmd, "The reference %s was not found in the current environment." % rest)
        if word == "Print":
            if rest == "True":
                return "Inductive True : Prop :=  I : True."
            return self.error(cmd, "%s not a defined object." % rest)
        if word == "Require":
            self.commit()
            return ""
        if word == "hang":
            time.sleep(3600)
        if word == "die":
            sys.exit(3)
        if self.proof is None:
            return self.error(cmd, "No focused proof (No proof-editing in progress).")
        name, gs = self.proof
        if word == "Proof":
            self.commit()
            return self.goals()
        if word == "Qed":
            if gs:
                return self.error(cmd, " (in proof %s): Attempt to save an incomplete proof" % name)
            self.proof = None
            self.defined.add(name)
            self.commit()
            return "%s is defined" % name
        if not gs:
            return self.error(cmd, "No such goal.")
        goal = gs[0]
        if body in ("exact I", "trivial", "auto") and goal == "True":
            self.proof = (name, gs[1:])
            self.commit()
            return self.goals()
        if body == "split" and "/\\" in goal:
            left, right = goal.split("/\\", 1)
            self.proof = (name, [left.strip(), right.strip()] + gs[1:])
            self.commit()
            return self.goals()
        if word == "exact":
            return self.error(cmd, 'The term "%s" has type "nat" while it is expected to have type "%s".' % (rest, goal))
        return self.error(cmd, "The reference %s was not found in the current environment." % word)


def main():
    s = Session()
    out = sys.stdout
    out.write("Welcome to FakeCoq\n" + s.prompt())
    out.flush()
    for line in sys.stdin:
        text = s.run(line)
        out.write((text + "\n" if text else "") + s.prompt())
        out.flush()


if __name__ == "__main__":
    main()
