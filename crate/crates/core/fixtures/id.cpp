#define id(a) a
id(id(int))
