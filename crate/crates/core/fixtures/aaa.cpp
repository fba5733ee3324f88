#define a(x) b
#define b(x) x
a(a)(a)(a)
