#define delta(x) x(x)
delta(delta)
