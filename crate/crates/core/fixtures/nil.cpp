#define NIL(xxx) xxx
#define G0(arg) NIL(G1)(arg)
#define G1(arg) NIL(arg)
G0(42) // ~> NIL(G1)(42) ~> G1(42) ~> NIL(42) ~> 42
