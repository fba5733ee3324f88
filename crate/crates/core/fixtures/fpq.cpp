#define f(p,q) p(f(q,q))
#define id(x) x
#define stop(x) done
f(id,stop)
