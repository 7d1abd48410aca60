"""Reference bracket built by structural Leibniz recursion.

Only the generator table, bilinearity and the two Leibniz rules are used; no
derivation operator is involved.  This is the independent route that freezes
the catalog golden files and cross-checks :func:`symplectic.poisson_bracket`.
"""

from __future__ import annotations

from .graded_poly import Polynomial, mul


def leibniz_bracket(S, f: Polynomial, g: Polynomial) -> Polynomial:
    alg = S.algebra
    m = -S.N
    deg = alg.degrees
    xs = [i for i, d in enumerate(deg) if d == 0]
    cache: dict = {}

    def factor_poly(fac) -> Polynomial:
        kind, v = fac
        if kind == "g":
            return Polynomial(alg, {((), (v,)): 1})
        return Polynomial(alg, {((v,), ()): 1})

    def fdeg(facs) -> int:
        return sum(deg[v] for k, v in facs if k == "g")

    def d_symbol(key, i):
        fpos, idx, dpos = key
        if alg.families[fpos].constant:
            return None
        return ("s", (fpos, idx, tuple(sorted(dpos + (i,)))))

    def base(a, b) -> Polynomial:
        ka, va = a
        kb, vb = b
        if ka == "g" and kb == "g":
            return alg.const(S.table(va, vb))
        out = alg.zero()
        if ka == "s" and kb == "g":
            for i in xs:
                t = S.table(i, vb)
                ds = d_symbol(va, i)
                if t and ds:
                    out = out + factor_poly(ds).scale(t)
        elif ka == "g" and kb == "s":
            for i in xs:
                t = S.table(va, i)
                ds = d_symbol(vb, i)
                if t and ds:
                    out = out + factor_poly(ds).scale(t)
        else:
            for i in xs:
                for j in xs:
                    t = S.table(i, j)
                    da, db = d_symbol(va, i), d_symbol(vb, j)
                    if t and da and db:
                        out = out + mul(factor_poly(da), factor_poly(db)).scale(t)
        return out

    def prod(facs) -> Polynomial:
        out = alg.const(1)
        for fac in facs:
            out = mul(out, factor_poly(fac))
        return out

    def br(F: tuple, G: tuple) -> Polynomial:
        if not F or not G:
            return alg.zero()
        key = (F, G)
        if key in cache:
            return cache[key]
        if len(F) > 1:
            a, r = F[:1], F[1:]
            # {a r, g} = a {r, g} + (-1)^(|r|(|g|+m)) {a, g} r
            s = -1 if (fdeg(r) * (fdeg(G) + m)) % 2 else 1
            res = mul(prod(a), br(r, G)) + mul(br(a, G), prod(r)).scale(s)
        elif len(G) > 1:
            a, r = G[:1], G[1:]
            # {f, a r} = {f, a} r + (-1)^((|f|+m)|a|) a {f, r}
            s = -1 if ((fdeg(F) + m) * fdeg(a)) % 2 else 1
            res = mul(br(F, a), prod(r)) + mul(prod(a), br(F, r)).scale(s)
        else:
            res = base(F[0], G[0])
        cache[key] = res
        return res

    out = alg.zero()
    for (fa, ga), ca in f.terms.items():
        F = tuple(("s", s) for s in fa) + tuple(("g", x) for x in ga)
        for (fb, gb), cb in g.terms.items():
            G = tuple(("s", s) for s in fb) + tuple(("g", x) for x in gb)
            b = br(F, G)
            if b:
                out = out + b.scale(ca * cb)
    return out
